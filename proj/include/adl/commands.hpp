#pragma once

// Command dispatch shared by the CLI and the tests. A command takes a fully
// resolved config object and returns the report without its timing block.

#include <cstdio>
#include <string>
#include <vector>

#include "adl/errors.hpp"
#include "adl/expansive.hpp"
#include "adl/io.hpp"
#include "adl/matching.hpp"
#include "adl/operators.hpp"
#include "adl/quasinorm.hpp"
#include "adl/report.hpp"
#include "adl/sequences.hpp"

namespace adl {

struct CommandOutcome {
  Json report;
  std::vector<std::string> flags;  ///< non-empty: completed but flagged (exit status 2)
  std::string csv;                 ///< per-trial dump, operators only
};

namespace detail {

inline const Json& need(const Json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg.at(key).is_null())
    fail(ErrorKind::ParseError, std::string("config is missing \"") + key + "\"");
  return cfg.at(key);
}

inline Exponent exponent_of(const Json& v) {
  if (v.is_string()) return parse_exponent(v.get<std::string>());
  if (v.is_number()) return parse_exponent(v.dump());
  fail(ErrorKind::ParseError, "exponent must be a number or \"inf\"");
}

inline TLParams tl_params(const Json& cfg) {
  TLParams p;
  p.alpha = cfg.value("alpha", 0.0);
  p.p = exponent_of(cfg.value("p", Json(2.0)));
  p.q = exponent_of(cfg.value("q", Json(2.0)));
  p.validate();
  return p;
}

inline QuadratureSpec quadrature(const Json& cfg) {
  QuadratureSpec q;
  const std::string m = cfg.value("method", std::string("auto"));
  if (m == "auto") q.method = QuadratureSpec::Method::Auto;
  else if (m == "grid") q.method = QuadratureSpec::Method::Grid;
  else if (m == "mc") q.method = QuadratureSpec::Method::MonteCarlo;
  else if (m == "dyadic") q.method = QuadratureSpec::Method::Dyadic;
  else fail(ErrorKind::ParseError, "unknown quadrature method '" + m + "'");
  q.n = cfg.value("refine", q.n);
  q.max_n = cfg.value("max_refine", q.max_n);
  q.rel_tol = cfg.value("rel_tol", q.rel_tol);
  q.mc_samples = cfg.value("mc_samples", q.mc_samples);
  q.seed = cfg.value("seed", std::uint64_t{0});
  q.pad = cfg.value("pad", q.pad);
  return q;
}

inline Dilation dilation_at(const Json& cfg, const char* key) {
  return validate_dilation(read_matrix(need(cfg, key).get<std::string>()));
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline CommandOutcome run_classify(const Json& cfg) {
  Dilation a = dilation_at(cfg, "matrix_a"), b = dilation_at(cfg, "matrix_b");
  auto rep = classify_equivalence(a, b, cfg.value("jmax", std::int64_t{40}), cfg.value("slope_tol", 0.02));
  CommandOutcome out;
  out.report["result"] = to_json(rep);
  auto oracle = rigidity_oracle(a, b);
  out.report["result"]["rigidity_oracle"] = oracle ? Json(to_string(*oracle)) : Json(nullptr);
  if (rep.verdict == EquivalenceVerdict::Inconclusive) out.flags.push_back("Inconclusive");
  return out;
}

inline CommandOutcome run_cocycle(const Json& cfg) {
  Dilation a = dilation_at(cfg, "matrix_a"), b = dilation_at(cfg, "matrix_b");
  auto p = cocycle_probe(a, b, cfg.value("jmax", std::int64_t{32}), cfg.value("tau", 1e-6));
  CommandOutcome out;
  out.report["result"] = to_json(p);
  if (p.verdict == CocycleVerdict::Inconclusive) out.flags.push_back("Inconclusive");
  return out;
}

inline CommandOutcome run_rho(const Json& cfg) {
  StepQuasiNorm qn(dilation_at(cfg, "matrix"));
  Vec x = parse_list(need(cfg, "point").get<std::string>(), "point");
  if (x.size() != qn.dilation().dim()) fail(ErrorKind::InvalidInput, "point has the wrong dimension");
  auto idx = qn.index(x);
  CommandOutcome out;
  out.report["result"] = {{"point", x}, {"value", qn.value_of(idx)}, {"j", idx.zero ? Json(nullptr) : Json(idx.j)},
                          {"zero", idx.zero}, {"saturated", idx.saturated}};
  if (idx.saturated) out.flags.push_back("Saturated");
  return out;
}

inline CommandOutcome run_rho_report(const Json& cfg) {
  StepQuasiNorm qn(dilation_at(cfg, "matrix"));
  const auto n = cfg.value("samples", std::size_t{10000});
  const auto seed = cfg.value("seed", std::uint64_t{0});
  CommandOutcome out;
  out.report["result"] = {{"lyapunov", to_json(qn.form())},
                          {"lambda_minus", qn.dilation().lambda_minus()},
                          {"lambda_plus", qn.dilation().lambda_plus()},
                          {"triangle", to_json(quasi_triangle_estimate(qn, n, seed))},
                          {"envelope", to_json(envelope_check(qn, n, seed))}};
  return out;
}

inline CommandOutcome run_seqnorm(const Json& cfg) {
  Dilation a = dilation_at(cfg, "matrix");
  SparseSequence c = read_sequence(need(cfg, "sequence").get<std::string>());
  if (c.dim() != 0 && c.dim() != a.dim()) fail(ErrorKind::InvalidInput, "sequence and matrix dimensions differ");
  auto est = seqnorm(a, tl_params(cfg), c, quadrature(cfg));
  CommandOutcome out;
  out.report["result"] = to_json(est);
  out.report["result"]["entries"] = c.size();
  out.report["result"]["moduli_taken"] = c.moduli_taken();
  if (est.unresolved) out.flags.push_back("UnresolvedQuadrature");
  if (est.pad_saturated) out.flags.push_back("PadSaturated");
  return out;
}

inline CommandOutcome run_match(const Json& cfg) {
  LatticePair pair(read_matrix(need(cfg, "matrix_s").get<std::string>()),
                   read_matrix(need(cfg, "matrix_t").get<std::string>()));
  auto [lo, hi] = parse_index_window(need(cfg, "window").get<std::string>());
  if (lo.size() != pair.dim()) fail(ErrorKind::InvalidInput, "window has the wrong dimension");
  auto res = hall_injection(pair, index_window(lo, hi));
  CommandOutcome out;
  out.report["result"] = to_json(res, pair);
  return out;
}

inline CommandOutcome run_operators(const Json& cfg) {
  Dilation a = dilation_at(cfg, "matrix_a"), b = dilation_at(cfg, "matrix_b");
  const std::string m = cfg.value("mode", std::string("permute"));
  ScaleMode mode;
  if (m == "permute") mode = ScaleMode::Permutation;
  else if (m == "retract") mode = ScaleMode::Retract;
  else fail(ErrorKind::ParseError, "mode must be 'permute' or 'retract', got '" + m + "'");
  auto scales = parse_list(cfg.value("scales", std::string("-1,1")), "scales");
  if (scales.size() != 2) fail(ErrorKind::ParseError, "scales must be 'j_lo,j_hi'");
  ExperimentSpec ex;
  ex.j_lo = static_cast<std::int64_t>(scales[0]);
  ex.j_hi = static_cast<std::int64_t>(scales[1]);
  ex.window = parse_window(cfg.value("window", std::string("-2,2;-2,2")));
  ex.density = cfg.value("density", 0.3);
  if (ex.window.dim() != a.dim()) fail(ErrorKind::InvalidInput, "window has the wrong dimension");
  auto rep = equivalence_experiment(a, b, tl_params(cfg), mode, cfg.value("trials", std::size_t{100}),
                                    cfg.value("seed", std::uint64_t{0}), quadrature(cfg), ex);
  CommandOutcome out;
  out.report["result"] = to_json(rep);
  if (rep.unresolved > 0) out.flags.push_back("UnresolvedQuadrature");
  if (!rep.ts_identity_all) out.flags.push_back("TSIdentityFailed");

  std::string csv = "trial,seed,entries,norm_src,norm_dst,ratio";
  if (mode == ScaleMode::Retract) csv += ",norm_t_src,norm_t_dst,ratio_t,ts_identity";
  csv += ",unresolved\n";
  for (const auto& t : rep.trials) {
    csv += std::to_string(t.index) + "," + std::to_string(t.seed) + "," + std::to_string(t.entries) + "," +
           fmt(t.norm_src) + "," + fmt(t.norm_dst) + "," + fmt(t.ratio);
    if (mode == ScaleMode::Retract)
      csv += "," + fmt(t.norm_t_src) + "," + fmt(t.norm_t_dst) + "," + fmt(t.ratio_t) + "," +
             (t.ts_identity ? "1" : "0");
    csv += std::string(",") + (t.unresolved ? "1" : "0") + "\n";
  }
  out.csv = std::move(csv);
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"classify", "cocycle", "rho", "rho-report",
                                                 "seqnorm",  "match",   "operators"};
  return names;
}

/// Runs cfg["command"]; the report carries schema, config, result and flags.
inline CommandOutcome run_command(const Json& cfg) {
  const std::string cmd = detail::need(cfg, "command").get<std::string>();
  CommandOutcome out;
  if (cmd == "classify") out = detail::run_classify(cfg);
  else if (cmd == "cocycle") out = detail::run_cocycle(cfg);
  else if (cmd == "rho") out = detail::run_rho(cfg);
  else if (cmd == "rho-report") out = detail::run_rho_report(cfg);
  else if (cmd == "seqnorm") out = detail::run_seqnorm(cfg);
  else if (cmd == "match") out = detail::run_match(cfg);
  else if (cmd == "operators") out = detail::run_operators(cfg);
  else fail(ErrorKind::ParseError, "unknown command '" + cmd + "'");
  Json report = {{"schema", schema_id(cmd)}, {"config", cfg}, {"result", std::move(out.report["result"])},
                 {"flags", out.flags}};
  out.report = std::move(report);
  return out;
}

}  // namespace adl
