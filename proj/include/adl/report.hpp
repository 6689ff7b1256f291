#pragma once

// JSON views of every result type. Reports are assembled as
//   {"schema": ..., "config": ..., "result": ..., "flags": [...], "timing": {...}}
// and everything except "timing" is a pure function of the config.

#include <string>
#include <vector>

#include "adl/expansive.hpp"
#include "adl/io.hpp"
#include "adl/matching.hpp"
#include "adl/operators.hpp"
#include "adl/quasinorm.hpp"
#include "adl/sequences.hpp"

namespace adl {

inline constexpr int kReportVersion = 1;

inline std::string schema_id(const std::string& command) {
  return "adl.report." + command + "/" + std::to_string(kReportVersion);
}

inline Json exponent_to_json(const Exponent& e) { return e.is_inf() ? Json("inf") : Json(e.value()); }

inline Json to_json(const EquivalenceReport& r) {
  Json norms = Json::array();
  for (const auto& [j, n] : r.norms) norms.push_back({j, n});
  return {{"epsilon", r.epsilon},
          {"window", r.window},
          {"effective_window", r.effective_window},
          {"norms", norms},
          {"growth_slope", r.growth_slope},
          {"slope_tol", r.slope_tol},
          {"kappa", r.kappa},
          {"max_norm", r.max_norm},
          {"max_norm_half", r.max_norm_half},
          {"overflow", r.overflow},
          {"verdict", to_string(r.verdict)}};
}

inline Json to_json(const CocycleProbe& p) {
  return {{"tau", p.tau},
          {"window", p.window},
          {"counts", p.counts},
          {"verdict", to_string(p.verdict)},
          {"counts_inverse_order", p.counts_inverse_order},
          {"verdict_inverse_order", to_string(p.verdict_inverse_order)},
          {"overflow", p.overflow}};
}

inline Json to_json(const LyapunovForm& f) {
  return {{"p", matrix_to_json(f.p)}, {"doublings", f.doublings}, {"residual", f.residual}};
}

inline Json to_json(const TriangleEstimate& t) {
  return {{"c_hat", t.c_hat}, {"samples", t.samples}, {"seed", t.seed}, {"argmax_x", t.argmax_x},
          {"argmax_y", t.argmax_y}};
}

inline Json to_json(const EnvelopeReport& e) {
  return {{"exponent_minus", e.exponent_minus}, {"exponent_plus", e.exponent_plus}, {"c_min", e.c_min},
          {"samples", e.samples},               {"above_one", e.above_one},         {"below_one", e.below_one},
          {"seed", e.seed}};
}

inline Json to_json(const NormEstimate& e) {
  Json j = {{"value", e.value},
            {"abs_error", e.abs_error},
            {"method", to_string(e.method)},
            {"refinement", e.refinement},
            {"evaluations", e.evaluations},
            {"seed", e.seed ? Json(*e.seed) : Json(nullptr)},
            {"unresolved", e.unresolved},
            {"pad_saturated", e.pad_saturated}};
  if (e.argmax_cube)
    j["argmax_cube"] = {{"j", e.argmax_cube->first}, {"k", e.argmax_cube->second}};
  else
    j["argmax_cube"] = nullptr;
  return j;
}

inline Json to_json(const MatchingResult& m, const LatticePair& pair) {
  Json assign = Json::array();
  for (const auto& [src, dst] : m.assignment)
    assign.push_back({{"source", src},
                      {"target", dst},
                      {"displacement", norm2(sub(pair.source_point(src), pair.target_point(dst)))}});
  return {{"assignment", assign},     {"max_displacement", m.max_displacement},
          {"bound", m.bound},         {"saturated", m.saturated},
          {"candidate_edges", m.candidate_edges}, {"det_s", pair.det_s},
          {"det_t", pair.det_t},      {"r_s", pair.r_s},
          {"r_t", pair.r_t}};
}

inline Json to_json(const RatioSummary& s) {
  return {{"min", s.min}, {"max", s.max}, {"median", s.median}, {"max_first_half", s.max_first_half},
          {"stable", s.stable}};
}

inline Json to_json(const ExperimentReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    Json row = {{"index", t.index},       {"seed", t.seed},         {"entries", t.entries},
                {"norm_src", t.norm_src}, {"norm_dst", t.norm_dst}, {"ratio", t.ratio},
                {"unresolved", t.unresolved}};
    if (r.mode == ScaleMode::Retract) {
      row["norm_t_src"] = t.norm_t_src;
      row["norm_t_dst"] = t.norm_t_dst;
      row["ratio_t"] = t.ratio_t;
      row["ts_identity"] = t.ts_identity;
    }
    trials.push_back(std::move(row));
  }
  Json scales = Json::array();
  for (const auto& [j, disp] : r.displacement) scales.push_back({{"j", j}, {"max_displacement", disp}, {"bound", r.bound.at(j)}});
  Json out = {{"mode", to_string(r.mode)},
              {"epsilon", r.epsilon},
              {"forward", to_json(r.forward)},
              {"unresolved", r.unresolved},
              {"scales", scales},
              {"trials", trials}};
  if (r.mode == ScaleMode::Retract) {
    out["backward"] = to_json(r.backward);
    out["ts_identity_all"] = r.ts_identity_all;
  }
  return out;
}

inline Json to_json(const ScaleMaps& maps) {
  Json scales = Json::array();
  for (const auto& [j, sm] : maps.maps)
    scales.push_back({{"j", j},
                      {"i", sm.i},
                      {"window_lo", sm.lo},
                      {"window_hi", sm.hi},
                      {"size", sm.forward.size()},
                      {"max_displacement", sm.max_displacement},
                      {"bound", sm.bound}});
  return {{"mode", to_string(maps.mode)}, {"epsilon", maps.epsilon}, {"scales", scales},
          {"precondition_verdict", to_string(maps.precondition.verdict)}};
}

}  // namespace adl
