#pragma once

// Type environments Γ (persistent, rightmost binding wins) and label
// environments Ω.

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "dimp/syntax.hpp"

namespace dimp {

struct EnvEntry {
  enum class Kind { Var, Fact, TyVar, LocVar, HeapVar, Weak };
  Kind kind = Kind::Fact;
  Name name;       // Var, TyVar, HeapVar
  Ty type;         // Var, Weak (invariant)
  Form fact;       // Fact
  Location loc;    // LocVar, Weak
  Location proto;  // Weak
};

class TypeEnv {
 public:
  TypeEnv() = default;

  TypeEnv bind(Name x, Ty t) const;
  TypeEnv fact(Form p) const;
  TypeEnv tyvar(Name a) const;
  TypeEnv locvar(Location l) const;
  TypeEnv heapvar(Name h) const;
  TypeEnv weak(Location l, Ty invariant, Location proto) const;

  // Rightmost binding of x, if any.
  const EnvEntry* lookup(const Name& x) const;
  bool has_tyvar(const Name& a) const;
  bool has_locvar(const Location& l) const;
  bool has_heapvar(const Name& h) const;
  const EnvEntry* weak_sig(const Location& l) const;

  // Oldest entry first.
  std::vector<const EnvEntry*> entries() const;
  std::size_t size() const { return size_; }

 private:
  struct Node {
    EnvEntry entry;
    std::shared_ptr<const Node> next;
  };
  TypeEnv push(EnvEntry e) const;

  std::shared_ptr<const Node> head_;
  std::size_t size_ = 0;
};

// Ω: labels in scope inside the current function, plus the labels of
// enclosing functions (which a break may not target).
struct LabelEnv {
  std::map<Name, World> labels;
  std::vector<Name> outer;
  // The output world of the enclosing function, used by world-less labels.
  std::optional<World> function_output;
};

}  // namespace dimp
