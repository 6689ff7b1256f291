// adl: command-line front end.
//
//   adl classify   --matrix-a A.json --matrix-b B.json [--jmax 40] [--slope-tol 0.02]
//   adl cocycle    --matrix-a A.json --matrix-b B.json [--jmax 32] [--tau 1e-6]
//   adl rho        --matrix A.json --point "x1,x2"
//   adl rho-report --matrix A.json [--samples N] [--seed S]
//   adl seqnorm    --matrix A.json --seq c.json --alpha F --p F|inf --q F|inf ...
//   adl match      --matrix-s S.json --matrix-t T.json --window "x0,x1;y0,y1"
//   adl operators  --matrix-a A.json --matrix-b B.json --mode permute|retract ...
//
// Every command accepts --config FILE (a JSON object keyed by flag names;
// flags on the command line win) and --out FILE (default: stdout).
// Exit status: 0 success, 2 completed with flags, 1 error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adl/adl.hpp"

namespace {

enum class Kind { Str, Int, UInt, Real, Exp };

struct Field {
  std::string key;
  Kind kind;
  adl::Json def;  // null: required
  std::string help;
};

using Table = std::vector<Field>;

const adl::Json kRequired = nullptr;

Table quad_fields(int refine) {
  return {{"method", Kind::Str, "auto", "auto|grid|mc|dyadic"},
          {"refine", Kind::Int, refine, "initial cells per finest-cube edge"},
          {"max_refine", Kind::Int, 64, "refinement cap"},
          {"rel_tol", Kind::Real, 1e-2, "relative tolerance for the unresolved flag"},
          {"mc_samples", Kind::Int, 64, "Monte Carlo samples per finest cube"},
          {"pad", Kind::Int, 2, "extra scales above j_max when p = inf"}};
}

std::map<std::string, Table> tables() {
  std::map<std::string, Table> t;
  t["classify"] = {{"matrix_a", Kind::Str, kRequired, "matrix file for A"},
                   {"matrix_b", Kind::Str, kRequired, "matrix file for B"},
                   {"jmax", Kind::Int, 40, "window J"},
                   {"slope_tol", Kind::Real, 0.02, "growth-slope tolerance"}};
  t["cocycle"] = {{"matrix_a", Kind::Str, kRequired, "matrix file for A"},
                  {"matrix_b", Kind::Str, kRequired, "matrix file for B"},
                  {"jmax", Kind::Int, 32, "window J"},
                  {"tau", Kind::Real, 1e-6, "clustering tolerance"}};
  t["rho"] = {{"matrix", Kind::Str, kRequired, "matrix file"},
              {"point", Kind::Str, kRequired, "comma-separated coordinates"}};
  t["rho-report"] = {{"matrix", Kind::Str, kRequired, "matrix file"},
                     {"samples", Kind::UInt, 10000, "sample pairs"},
                     {"seed", Kind::UInt, 0, "seed"}};
  t["seqnorm"] = {{"matrix", Kind::Str, kRequired, "matrix file"},
                  {"sequence", Kind::Str, kRequired, "sequence file"},
                  {"alpha", Kind::Real, 0.0, "smoothness"},
                  {"p", Kind::Exp, 2.0, "outer exponent or inf"},
                  {"q", Kind::Exp, 2.0, "inner exponent or inf"},
                  {"seed", Kind::UInt, 0, "seed (Monte Carlo)"}};
  for (auto& f : quad_fields(16)) t["seqnorm"].push_back(f);
  t["match"] = {{"matrix_s", Kind::Str, kRequired, "matrix file for S"},
                {"matrix_t", Kind::Str, kRequired, "matrix file for T"},
                {"window", Kind::Str, kRequired, "source index window 'x0,x1;y0,y1' (inclusive)"}};
  t["operators"] = {{"matrix_a", Kind::Str, kRequired, "matrix file for A"},
                    {"matrix_b", Kind::Str, kRequired, "matrix file for B"},
                    {"mode", Kind::Str, "permute", "permute|retract"},
                    {"alpha", Kind::Real, 0.0, "smoothness"},
                    {"p", Kind::Exp, 2.0, "outer exponent or inf"},
                    {"q", Kind::Exp, 2.0, "inner exponent or inf"},
                    {"trials", Kind::UInt, 100, "random sequences"},
                    {"seed", Kind::UInt, 0, "seed"},
                    {"scales", Kind::Str, "-1,1", "source scale range 'j_lo,j_hi'"},
                    {"window", Kind::Str, "-2,2;-2,2", "spatial window 'x0,x1;y0,y1'"},
                    {"density", Kind::Real, 0.3, "fill probability per cell"},
                    {"emit_csv", Kind::Str, "", "per-trial CSV path"}};
  for (auto& f : quad_fields(8)) t["operators"].push_back(f);
  for (auto& [name, table] : t) table.push_back({"out", Kind::Str, "", "report path (default stdout)"});
  return t;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& ch : f)
    if (ch == '_') ch = '-';
  if (key == "sequence") return "--seq,--sequence";
  return "--" + f;
}

std::string normalize_key(std::string k) {
  for (char& ch : k)
    if (ch == '-') ch = '_';
  return k == "seq" ? "sequence" : k;
}

adl::Json convert(const Field& f, const adl::Json& raw) {
  std::string s = raw.is_string() ? raw.get<std::string>() : raw.dump();
  try {
    switch (f.kind) {
      case Kind::Str:
        return s;
      case Kind::Int: {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) break;
        return v;
      }
      case Kind::UInt: {
        if (!s.empty() && s[0] == '-') break;
        std::size_t pos = 0;
        unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) break;
        return v;
      }
      case Kind::Real: {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) break;
        return v;
      }
      case Kind::Exp: {
        adl::Exponent e = adl::parse_exponent(s);
        return adl::exponent_to_json(e);
      }
    }
  } catch (const adl::Error&) {
    throw;
  } catch (const std::exception&) {
  }
  adl::fail(adl::ErrorKind::ParseError, "bad value '" + s + "' for " + f.key);
}

int emit(const adl::Json& report, const std::string& out) {
  std::string text = report.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    adl::write_text_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic dilations: equivalence, sequence norms, matchings and operators"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ADL_THREADS or hardware)");

  const auto all = tables();
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_path;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : adl::command_names()) {
    auto* sub = app.add_subcommand(name);
    subs[name] = sub;
    sub->add_option("--config", config_path[name], "JSON config; command-line flags override it");
    for (const auto& f : all.at(name)) sub->add_option(flag_name(f.key), given[name][f.key], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (threads > 0) adl::set_thread_count(threads);

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;
  const Table& table = all.at(name);
  CLI::App* sub = subs.at(name);

  adl::Json cfg = adl::Json::object();
  std::string out_path;
  try {
    adl::Json file = adl::Json::object();
    if (!config_path[name].empty()) {
      file = adl::read_json_file(config_path[name]);
      if (!file.is_object()) adl::fail(adl::ErrorKind::ParseError, config_path[name] + ": config must be an object");
    }
    std::map<std::string, adl::Json> from_file;
    for (auto it = file.begin(); it != file.end(); ++it) {
      std::string key = normalize_key(it.key());
      if (key == "command") {
        if (it.value() != name)
          adl::fail(adl::ErrorKind::ParseError, config_path[name] + ": config is for command " + it.value().dump());
        continue;
      }
      bool known = false;
      for (const auto& f : table) known = known || f.key == key;
      if (!known) adl::fail(adl::ErrorKind::ParseError, config_path[name] + ": unknown key \"" + it.key() + "\"");
      from_file[key] = it.value();
    }
    cfg["command"] = name;
    for (const auto& f : table) {
      adl::Json v = f.def;
      if (auto it = from_file.find(f.key); it != from_file.end()) v = it->second;
      if (sub->count(flag_name(f.key).substr(0, flag_name(f.key).find(','))) > 0) v = given[name][f.key];
      if (v.is_null()) adl::fail(adl::ErrorKind::ParseError, "missing required option " + flag_name(f.key));
      cfg[f.key] = convert(f, v);
    }
    out_path = cfg.at("out").get<std::string>();

    const auto t0 = std::chrono::steady_clock::now();
    adl::CommandOutcome res = adl::run_command(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.report["timing"] = {{"wall_seconds", secs}, {"threads", adl::thread_count()}};

    if (name == "rho") {
      const auto& r = res.report["result"];
      std::printf("rho = %.17g  j = %s\n", r["value"].get<double>(), r["j"].dump().c_str());
      if (!out_path.empty()) emit(res.report, out_path);
    } else {
      emit(res.report, out_path);
    }
    if (name == "operators" && !cfg.at("emit_csv").get<std::string>().empty())
      adl::write_text_file(cfg.at("emit_csv").get<std::string>(), res.csv);
    for (const auto& f : res.flags) std::fprintf(stderr, "flag: %s\n", f.c_str());
    return res.flags.empty() ? 0 : 2;
  } catch (const adl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    adl::Json err = {{"schema", "adl.error/1"},
                     {"config", cfg},
                     {"error", {{"kind", std::string(adl::to_string(e.kind()))}, {"message", e.what()}}}};
    if (!out_path.empty()) {
      try {
        emit(err, out_path);
      } catch (const adl::Error&) {
      }
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
