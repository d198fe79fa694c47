#include "dimp/env.hpp"

namespace dimp {

TypeEnv TypeEnv::push(EnvEntry e) const {
  TypeEnv out;
  out.head_ = std::make_shared<const Node>(Node{std::move(e), head_});
  out.size_ = size_ + 1;
  return out;
}

TypeEnv TypeEnv::bind(Name x, Ty t) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::Var;
  e.name = std::move(x);
  e.type = std::move(t);
  return push(std::move(e));
}

TypeEnv TypeEnv::fact(Form p) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::Fact;
  e.fact = std::move(p);
  return push(std::move(e));
}

TypeEnv TypeEnv::tyvar(Name a) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::TyVar;
  e.name = std::move(a);
  return push(std::move(e));
}

TypeEnv TypeEnv::locvar(Location l) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::LocVar;
  e.loc = std::move(l);
  return push(std::move(e));
}

TypeEnv TypeEnv::heapvar(Name h) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::HeapVar;
  e.name = std::move(h);
  return push(std::move(e));
}

TypeEnv TypeEnv::weak(Location l, Ty invariant, Location proto) const {
  EnvEntry e;
  e.kind = EnvEntry::Kind::Weak;
  e.loc = std::move(l);
  e.type = std::move(invariant);
  e.proto = std::move(proto);
  return push(std::move(e));
}

const EnvEntry* TypeEnv::lookup(const Name& x) const {
  for (const Node* n = head_.get(); n; n = n->next.get()) {
    if (n->entry.kind == EnvEntry::Kind::Var && n->entry.name == x) return &n->entry;
  }
  return nullptr;
}

bool TypeEnv::has_tyvar(const Name& a) const {
  for (const Node* n = head_.get(); n; n = n->next.get()) {
    if (n->entry.kind == EnvEntry::Kind::TyVar && n->entry.name == a) return true;
  }
  return false;
}

bool TypeEnv::has_locvar(const Location& l) const {
  for (const Node* n = head_.get(); n; n = n->next.get()) {
    if (n->entry.kind == EnvEntry::Kind::LocVar && n->entry.loc == l) return true;
  }
  return false;
}

bool TypeEnv::has_heapvar(const Name& h) const {
  for (const Node* n = head_.get(); n; n = n->next.get()) {
    if (n->entry.kind == EnvEntry::Kind::HeapVar && n->entry.name == h) return true;
  }
  return false;
}

const EnvEntry* TypeEnv::weak_sig(const Location& l) const {
  for (const Node* n = head_.get(); n; n = n->next.get()) {
    if (n->entry.kind == EnvEntry::Kind::Weak && n->entry.loc == l) return &n->entry;
  }
  return nullptr;
}

std::vector<const EnvEntry*> TypeEnv::entries() const {
  std::vector<const EnvEntry*> out;
  out.reserve(size_);
  for (const Node* n = head_.get(); n; n = n->next.get()) out.push_back(&n->entry);
  return {out.rbegin(), out.rend()};
}

}  // namespace dimp
