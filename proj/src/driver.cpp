#include "dimp/driver.hpp"

#include <future>

#include "dimp/rename.hpp"
#include "dimp/wf.hpp"

namespace dimp {

namespace {

struct Job {
  std::size_t index;
  TypeEnv env;
  HeapEnv heap;
  Decl decl;
};

DefResult run(const Job& job, const DriverOptions& opts) {
  FreshScope scope;
  DefResult r{job.decl.name, job.decl.line, std::nullopt, {}};
  std::shared_ptr<Oracle> base = make_oracle(opts.solver);
  std::shared_ptr<RecordingOracle> rec;
  if (opts.record_obligations) {
    rec = std::make_shared<RecordingOracle>(base);
    base = rec;
  }
  try {
    in_rule("Define", [&] {
      wf_type(job.env, job.decl.type);
      Checker c(base, opts.check);
      c.static_locs = opts.static_locs;
      c.type_as(job.env, job.heap, LabelEnv{}, job.decl.body, job.decl.type, false);
    });
  } catch (Error& e) {
    e.set_line(job.decl.line);
    r.error = e;
  }
  if (rec) r.obligations = rec->entries();
  return r;
}

}  // namespace

int exit_code(const Error& e) {
  if (e.solver_failure()) return 5;
  switch (e.kind()) {
    case ErrorKind::Parse: return 2;
    case ErrorKind::Wf: return 3;
    case ErrorKind::Solver: return 5;
    default: return 4;
  }
}

bool ProgramResult::ok() const { return exit_code() == 0; }

int ProgramResult::exit_code() const {
  for (auto& d : defs) {
    if (d.error) return dimp::exit_code(*d.error);
  }
  if (decl_error) return dimp::exit_code(*decl_error);
  return 0;
}

ProgramResult check_program(const Program& input, const DriverOptions& opts) {
  ProgramResult out;
  Program p = rename_program(input);
  TypeEnv env;
  std::optional<HeapEnv> heap;
  std::vector<Location> weaks;
  auto current_heap = [&]() {
    if (!heap) {
      Name h("H0");
      if (!env.has_heapvar(h)) env = env.heapvar(h);
      heap = HeapEnv{h, {}};
    }
    HeapEnv hv = *heap;
    for (auto& w : weaks) {
      bool present = false;
      for (auto& b : hv.bindings) present = present || binding_loc(b) == w;
      if (!present) hv.bindings.push_back(HWeak{w, ThawState::frzn()});
    }
    return hv;
  };
  std::vector<Job> jobs;
  for (auto& d : p.decls) {
    try {
      switch (d.kind) {
        case Decl::Kind::HeapVar: env = env.heapvar(d.name); break;
        case Decl::Kind::TyVar: env = env.tyvar(d.name); break;
        case Decl::Kind::LocVar: env = env.locvar(d.loc); break;
        case Decl::Kind::Assume:
          in_rule("Assume", [&] { wf_type(env, d.type); });
          env = env.bind(d.name, d.type);
          break;
        case Decl::Kind::Fact:
          in_rule("Fact", [&] { wf_formula(env, d.fact); });
          env = env.fact(d.fact);
          break;
        case Decl::Kind::Weak:
          in_rule("Weak", [&] {
            wf_location(env, d.proto);
            wf_type(env, d.type);
          });
          env = env.weak(d.loc, d.type, d.proto);
          weaks.push_back(d.loc);
          break;
        case Decl::Kind::InitialHeap: {
          if (heap) fail(ErrorKind::Wf, "initial heap declared twice");
          if (!env.has_heapvar(d.heap.deep)) env = env.heapvar(d.heap.deep);
          in_rule("InitialHeap", [&] { wf_heap(env, d.heap); });
          HeapEnvResult he = heap_env(d.heap);
          for (auto& [x, t] : he.binds) env = env.bind(x, t);
          heap = he.env;
          break;
        }
        case Decl::Kind::Define: {
          HeapEnv h = current_heap();
          jobs.push_back(Job{jobs.size(), env, h, d});
          env = env.bind(d.name, d.type);
          break;
        }
      }
    } catch (Error& e) {
      e.set_line(d.line);
      out.decl_error = e;
      break;
    }
  }
  out.defs.resize(jobs.size());
  if (opts.parallel && jobs.size() > 1) {
    std::vector<std::future<DefResult>> fs;
    for (auto& j : jobs) fs.push_back(std::async(std::launch::async, [&j, &opts] { return run(j, opts); }));
    for (std::size_t i = 0; i < fs.size(); ++i) out.defs[i] = fs[i].get();
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) out.defs[i] = run(jobs[i], opts);
  }
  return out;
}

}  // namespace dimp
