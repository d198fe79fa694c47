#include "dimp/cli.hpp"

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dimp/djs.hpp"
#include "dimp/driver.hpp"
#include "dimp/parser.hpp"
#include "dimp/printer.hpp"

#ifndef DIMP_PRELUDE_DIR
#define DIMP_PRELUDE_DIR "prelude"
#endif

namespace dimp {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

ordered_json error_json(const Error& e) {
  ordered_json j;
  j["kind"] = to_string(e.kind());
  j["message"] = e.message();
  j["line"] = e.line();
  j["trace"] = e.trace();
  j["notes"] = e.notes();
  j["solver_failure"] = e.solver_failure();
  return j;
}

}  // namespace

std::string default_prelude_path() { return std::string(DIMP_PRELUDE_DIR) + "/objects.dimp"; }

int check_file(const std::string& path, const CliConfig& config, std::ostream& out, std::ostream& err) {
  ParseOptions popts;
  popts.exists_loc = config.exists_loc;
  popts.weak_poly = config.weak_poly_syntax;
  bool djs = ends_with(path, ".djs");
  ordered_json report;
  report["file"] = path;

  auto finish = [&](int code) {
    if (config.json) {
      report["exit_code"] = code;
      out << report.dump(2) << "\n";
    }
    return code;
  };

  Program program;
  try {
    std::vector<std::string> preludes = config.preludes;
    if (preludes.empty() && djs) preludes.push_back(default_prelude_path());
    for (auto& pre : preludes) {
      Program pp = parse_program(read_file(pre), popts);
      program.decls.insert(program.decls.end(), pp.decls.begin(), pp.decls.end());
    }
    std::string text = read_file(path);
    Program body = djs ? desugar_program(text, popts) : parse_program(text, popts);
    if (config.emit_dimp) {
      if (config.json) {
        report["dimp"] = to_pretty(body);
      } else {
        out << to_pretty(body);
      }
    }
    program.decls.insert(program.decls.end(), body.decls.begin(), body.decls.end());
  } catch (const Error& e) {
    if (config.json) {
      report["status"] = "error";
      report["error"] = error_json(e);
    } else {
      err << path << ": " << e.render() << "\n";
    }
    return finish(exit_code(e));
  } catch (const std::exception& e) {
    if (config.json) {
      report["status"] = "error";
      report["error"] = {{"kind", "io"}, {"message", e.what()}};
    } else {
      err << path << ": " << e.what() << "\n";
    }
    return finish(1);
  }

  DriverOptions dopts;
  dopts.check.exists_loc = config.exists_loc;
  dopts.solver = parse_solver_spec(config.solver, config.solver_timeout_ms);
  dopts.record_obligations = config.emit_obligations;
  dopts.parallel = config.parallel;
  ProgramResult res = check_program(program, dopts);
  int code = res.exit_code();

  ordered_json defs = ordered_json::array();
  ordered_json obligations = ordered_json::array();
  for (auto& d : res.defs) {
    ordered_json j;
    j["name"] = d.name.str();
    j["line"] = d.line;
    j["status"] = d.error ? "error" : "ok";
    if (d.error) j["error"] = error_json(*d.error);
    defs.push_back(j);
    if (!config.json) {
      if (d.error) {
        err << path << ": " << d.name.str() << ": " << d.error->render() << "\n";
      } else {
        out << d.name.str() << ": ok\n";
      }
    }
    for (auto& o : d.obligations) {
      if (config.json) {
        obligations.push_back({{"definition", d.name.str()}, {"verdict", to_string(o.verdict)}, {"smtlib", o.smtlib}});
      } else {
        out << "; obligation of " << d.name.str() << ": " << to_string(o.verdict) << "\n" << o.smtlib << "\n";
      }
    }
  }
  if (res.decl_error && !config.json) err << path << ": " << res.decl_error->render() << "\n";
  if (config.json) {
    report["status"] = code == 0 ? "ok" : "error";
    report["definitions"] = defs;
    if (res.decl_error) report["error"] = error_json(*res.decl_error);
    if (config.emit_obligations) report["obligations"] = obligations;
  }
  return finish(code);
}

}  // namespace dimp
