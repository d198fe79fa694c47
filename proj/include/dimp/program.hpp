#pragma once

// A D_imp compilation unit: a sequence of declarations processed in order.

#include <vector>

#include "dimp/syntax.hpp"

namespace dimp {

struct Decl {
  enum class Kind {
    HeapVar,      // (heapvar H)
    TyVar,        // (tyvar A)
    LocVar,       // (locvar L)
    Assume,       // (assume x T)
    Fact,         // (fact p)
    Weak,         // (weak ~l T l')
    InitialHeap,  // (initial-heap HEAP)
    Define,       // (define f T e)
  };
  Kind kind = Kind::Fact;
  Name name;
  Location loc;
  Location proto;
  Ty type;
  Form fact;
  HeapType heap;
  Exp body;
  int line = 0;
};

struct Program {
  std::vector<Decl> decls;
};

}  // namespace dimp
