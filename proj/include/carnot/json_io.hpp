#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carnot/besicovitch.hpp"
#include "carnot/gauge.hpp"
#include "carnot/group.hpp"
#include "carnot/plane.hpp"
#include "carnot/quotient.hpp"
#include "carnot/xreal.hpp"

namespace carnot {

using nlohmann::json;

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("malformed JSON document");
  return j;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

namespace jio {

inline double require_number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + ": expected a number");
  return j.get<double>();
}

inline int require_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw ParseError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

inline const json& require_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field: ") + key);
  return *it;
}

}  // namespace jio

// ---------------------------------------------------------------------------
// Extended-range numbers: plain JSON number when the value survives a
// round-trip through double, otherwise {"m": mantissa, "e2": exponent}
// meaning m * 2^e2 (e2 as a decimal string beyond int64).

inline json xreal_to_json(const XReal& x) {
  if (x.is_zero()) return json(0.0);
  exp2_t e = x.exponent2();
  if (e > -1000 && e < 1000) return json(x.to_double());
  json j;
  j["m"] = x.mantissa();
  constexpr exp2_t i64max = 0x7fffffffffffffffLL;
  if (e >= -i64max && e <= i64max)
    j["e2"] = static_cast<std::int64_t>(e);
  else
    j["e2"] = exp2_to_string(e);
  return j;
}

inline XReal xreal_from_json(const json& j) {
  if (j.is_number()) return XReal(j.get<double>());
  if (j.is_object()) {
    double m = jio::require_number(jio::require_field(j, "m"), "m");
    const json& e = jio::require_field(j, "e2");
    exp2_t e2;
    if (e.is_number_integer())
      e2 = e.get<std::int64_t>();
    else if (e.is_string())
      e2 = exp2_from_string(e.get<std::string>());
    else
      throw ParseError("e2: expected integer or string");
    return XReal::from_parts(m, e2);
  }
  throw ParseError("expected number or {m, e2} object");
}

inline json exp2_to_json(exp2_t e) {
  constexpr exp2_t i64max = 0x7fffffffffffffffLL;
  if (e >= -i64max && e <= i64max) return json(static_cast<std::int64_t>(e));
  return json(exp2_to_string(e));
}

inline exp2_t exp2_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return exp2_from_string(j.get<std::string>());
  throw ParseError("expected integer or decimal string exponent");
}

// ---------------------------------------------------------------------------
// Group presentations

inline json group_to_json(const GroupSpec& g) {
  json j;
  j["step"] = g.step();
  j["layer_dims"] = g.layer_dims();
  json brackets = json::array();
  for (const auto& e : g.brackets()) {
    json terms = json::array();
    for (const auto& t : e.terms) terms.push_back({{"k", t.k}, {"c", t.c}});
    brackets.push_back({{"i", e.i}, {"j", e.j}, {"terms", terms}});
  }
  j["brackets"] = brackets;
  if (!g.name().empty()) j["name"] = g.name();
  return j;
}

inline GroupSpec group_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("group: expected an object");
  int step = jio::require_int(jio::require_field(j, "step"), "step");
  const json& dims_j = jio::require_field(j, "layer_dims");
  if (!dims_j.is_array()) throw ParseError("layer_dims: expected an array");
  std::vector<int> dims;
  for (const auto& d : dims_j) dims.push_back(jio::require_int(d, "layer_dims entry"));
  std::vector<BracketEntry> brackets;
  const json& br = jio::require_field(j, "brackets");
  if (!br.is_array()) throw ParseError("brackets: expected an array");
  for (const auto& e : br) {
    BracketEntry entry;
    entry.i = jio::require_int(jio::require_field(e, "i"), "bracket i");
    entry.j = jio::require_int(jio::require_field(e, "j"), "bracket j");
    const json& terms = jio::require_field(e, "terms");
    if (!terms.is_array()) throw ParseError("bracket terms: expected an array");
    for (const auto& t : terms)
      entry.terms.push_back({jio::require_int(jio::require_field(t, "k"), "term k"),
                             jio::require_number(jio::require_field(t, "c"), "term c")});
    brackets.push_back(std::move(entry));
  }
  std::string name = j.value("name", std::string{});
  return GroupSpec(step, std::move(dims), std::move(brackets), std::move(name));
}

// ---------------------------------------------------------------------------
// Gauge balls and plane models

inline json gauge_to_json(const GaugeBall& b) {
  json j;
  j["form"] = b.form() == GaugeForm::coordinate ? "coordinate" : "layer";
  j["c"] = b.coefficients();
  j["gamma"] = b.exponents();
  return j;
}

inline GaugeBall gauge_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("gauge: expected an object");
  std::string form = jio::require_field(j, "form").get<std::string>();
  GaugeForm f;
  if (form == "coordinate")
    f = GaugeForm::coordinate;
  else if (form == "layer")
    f = GaugeForm::layer;
  else
    throw ParseError("gauge form must be \"coordinate\" or \"layer\"");
  std::vector<double> c, gamma;
  for (const auto& v : jio::require_field(j, "c")) c.push_back(jio::require_number(v, "c"));
  for (const auto& v : jio::require_field(j, "gamma"))
    gamma.push_back(jio::require_number(v, "gamma"));
  return GaugeBall(f, std::move(c), std::move(gamma));
}

inline json plane_model_to_json(const PlaneModel& m) {
  return json{{"s", m.s}, {"a", m.a}, {"b", m.b}, {"alpha", m.alpha}, {"beta", m.beta}};
}

inline PlaneModel plane_model_from_json(const json& j) {
  PlaneModel m;
  m.s = jio::require_number(jio::require_field(j, "s"), "s");
  m.a = jio::require_number(jio::require_field(j, "a"), "a");
  m.b = jio::require_number(jio::require_field(j, "b"), "b");
  m.alpha = j.contains("alpha") ? jio::require_number(j["alpha"], "alpha") : 1.0;
  m.beta = j.contains("beta") ? jio::require_number(j["beta"], "beta") : 1.0;
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Families

/// A family file bundles the metric it lives in with the balls, so
/// verification needs nothing else.
struct FamilyDocument {
  std::optional<PlaneModel> plane_metric;
  std::optional<std::pair<GroupSpec, GaugeBall>> group_metric;
  BesicovitchFamily family;
};

inline json family_to_json(const FamilyDocument& doc) {
  const BesicovitchFamily& fam = doc.family;
  json j;
  if (fam.space == BesicovitchFamily::Space::plane) {
    j["space"] = "plane";
    if (!doc.plane_metric) throw ConsistencyError("family document: missing plane metric");
    j["model"] = plane_model_to_json(*doc.plane_metric);
  } else {
    j["space"] = "group";
    if (!doc.group_metric) throw ConsistencyError("family document: missing group metric");
    j["group_ref"] = {{"group", group_to_json(doc.group_metric->first)},
                      {"gauge", gauge_to_json(doc.group_metric->second)}};
  }
  json witness = json::array();
  for (const auto& w : fam.witness) witness.push_back(xreal_to_json(w));
  j["witness"] = witness;
  json balls = json::array();
  for (const auto& b : fam.balls) {
    json center = json::array();
    for (const auto& c : b.center) center.push_back(xreal_to_json(c));
    balls.push_back({{"center", center}, {"radius", xreal_to_json(b.radius)}});
  }
  j["balls"] = balls;
  if (fam.meta) {
    const FamilyMeta& m = *fam.meta;
    json meta;
    meta["model"] = plane_model_to_json(m.model);
    meta["r"] = m.r;
    meta["margin"] = m.margin;
    json eps = json::array(), eps_log2 = json::array();
    for (exp2_t M : m.eps_log2) {
      eps_log2.push_back(exp2_to_json(M));
      eps.push_back(xreal_to_json(XReal::pow2(-M)));
    }
    meta["eps_log2"] = eps_log2;
    meta["epsilons"] = eps;
    meta["embed_index"] = m.embed_index;
    meta["lift_scale"] = {m.lift_scale[0], m.lift_scale[1]};
    j["meta"] = meta;
  }
  return j;
}

inline FamilyDocument family_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("family: expected an object");
  FamilyDocument doc;
  std::string space = jio::require_field(j, "space").get<std::string>();
  if (space == "plane") {
    doc.family.space = BesicovitchFamily::Space::plane;
    doc.plane_metric = plane_model_from_json(jio::require_field(j, "model"));
  } else if (space == "group") {
    doc.family.space = BesicovitchFamily::Space::group;
    const json& ref = jio::require_field(j, "group_ref");
    doc.group_metric.emplace(group_from_json(jio::require_field(ref, "group")),
                             gauge_from_json(jio::require_field(ref, "gauge")));
  } else {
    throw ParseError("family space must be \"plane\" or \"group\"");
  }
  for (const auto& w : jio::require_field(j, "witness"))
    doc.family.witness.push_back(xreal_from_json(w));
  const json& balls = jio::require_field(j, "balls");
  if (!balls.is_array()) throw ParseError("balls: expected an array");
  for (const auto& b : balls) {
    Ball ball;
    for (const auto& c : jio::require_field(b, "center"))
      ball.center.push_back(xreal_from_json(c));
    ball.radius = xreal_from_json(jio::require_field(b, "radius"));
    doc.family.balls.push_back(std::move(ball));
  }
  if (j.contains("meta")) {
    const json& mj = j["meta"];
    FamilyMeta meta;
    meta.model = plane_model_from_json(jio::require_field(mj, "model"));
    meta.r = jio::require_number(jio::require_field(mj, "r"), "meta r");
    meta.margin = mj.contains("margin") ? jio::require_number(mj["margin"], "margin") : 0.0;
    for (const auto& e : jio::require_field(mj, "eps_log2"))
      meta.eps_log2.push_back(exp2_from_json(e));
    meta.embed_index =
        mj.contains("embed_index") ? jio::require_int(mj["embed_index"], "embed_index") : 0;
    if (mj.contains("lift_scale")) {
      meta.lift_scale[0] = jio::require_number(mj["lift_scale"][0], "lift_scale");
      meta.lift_scale[1] = jio::require_number(mj["lift_scale"][1], "lift_scale");
    }
    doc.family.meta = std::move(meta);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Reports

inline json verification_to_json(const VerificationReport& rep) {
  json j;
  j["verdict"] = rep.pass ? "pass" : "fail";
  j["certified"] = rep.certified;
  j["tol"] = rep.tol;
  json wr = json::array();
  for (const auto& r : rep.witness_residuals) wr.push_back(xreal_to_json(r));
  j["witness_residuals"] = wr;
  json margins = json::array();
  for (const auto& m : rep.exclusion_margins)
    margins.push_back({{"i", m.i}, {"j", m.j}, {"margin", xreal_to_json(m.margin)}});
  j["exclusion_margins"] = margins;
  j["failing_balls"] = rep.failing_balls;
  json fp = json::array();
  for (const auto& p : rep.failing_pairs) fp.push_back({p.first, p.second});
  j["failing_pairs"] = fp;
  return j;
}

inline json submetry_to_json(const SubmetryReport& rep) {
  return json{{"max_subset_violation", rep.max_subset_violation},
              {"max_superset_violation", rep.max_superset_violation},
              {"max_lift_optimality_violation", rep.max_lift_optimality_violation},
              {"max_projection_mismatch", rep.max_projection_mismatch},
              {"samples", rep.samples},
              {"seed", rep.seed}};
}

inline json quotient_to_json(const QuotientSpec& qs) {
  return json{{"parent", group_to_json(qs.parent())},
              {"parent_gauge", gauge_to_json(qs.parent_ball())},
              {"quotient", group_to_json(qs.quotient())},
              {"induced_gauge", gauge_to_json(qs.induced_ball())}};
}

inline json restriction_to_json(const QuotientSpec& qs, const HeisenbergRestriction& h) {
  return json{{"i", h.i},
              {"j", h.j},
              {"xi", h.xi},
              {"quotient", group_to_json(qs.quotient())},
              {"induced_gauge", gauge_to_json(qs.induced_ball())}};
}

inline json validation_to_json(const ValidationReport& rep) {
  return json{{"verdict", rep.pass ? "pass" : "fail"},
              {"antisymmetry_residual", rep.antisymmetry_residual},
              {"grading_residual", rep.grading_residual},
              {"jacobi_residual", rep.jacobi_residual},
              {"associativity_residual", rep.associativity_residual},
              {"associativity_sampled", rep.associativity_sampled},
              {"violations", rep.violations}};
}

inline json pipeline_report_to_json(const PipelineReport& rep) {
  json j;
  j["verdict"] = rep.verdict;
  j["applicable"] = rep.applicable;
  j["gamma_star"] = rep.gamma_star;
  j["step"] = rep.step;
  j["witness_index"] = rep.witness_index;
  if (rep.model) j["model"] = plane_model_to_json(*rep.model);
  if (rep.plane_verification)
    j["plane_verification"] = verification_to_json(*rep.plane_verification);
  if (rep.group_verification)
    j["group_verification"] = verification_to_json(*rep.group_verification);
  if (rep.lifted_family) j["family_size"] = rep.lifted_family->balls.size();
  if (rep.heuristic) {
    j["heuristic"] = {{"family_size", rep.heuristic->family.balls.size()},
                      {"proposals", rep.heuristic->proposals},
                      {"verification", verification_to_json(rep.heuristic->report)}};
  }
  j["notes"] = rep.notes;
  return j;
}

// ---------------------------------------------------------------------------
// CSV exports

/// One row per ball: center_1..center_d, radius. Values outside the double
/// range are written in display notation (plot data, not a round-trip
/// format; the JSON document is the lossless one).
inline void write_family_csv(std::ostream& os, const BesicovitchFamily& fam) {
  if (fam.balls.empty()) return;
  std::size_t d = fam.balls.front().center.size();
  for (std::size_t i = 0; i < d; ++i) os << "center_" << (i + 1) << ",";
  os << "radius\n";
  auto cell = [&](const XReal& v) {
    double dv = v.to_double();
    if (std::isfinite(dv) && (v.is_zero() || dv != 0.0)) return format_double(dv);
    return to_display_string(v);
  };
  for (const auto& b : fam.balls) {
    for (const auto& c : b.center) os << cell(c) << ",";
    os << cell(b.radius) << "\n";
  }
}

/// Header row of coordinate names, then one row per sample.
inline void write_points_csv(std::ostream& os, int dim, const std::vector<PointD>& pts) {
  for (int i = 0; i < dim; ++i) os << "x" << (i + 1) << (i + 1 < dim ? "," : "\n");
  for (const auto& p : pts) {
    for (int i = 0; i < dim; ++i) os << format_double(p.c[i]) << (i + 1 < dim ? "," : "\n");
  }
}

}  // namespace carnot
