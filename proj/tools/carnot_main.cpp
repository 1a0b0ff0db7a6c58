// Command-line front end: gauge distances, unit-sphere sampling, quotient
// derivation, and generation/verification of ball families that witness
// the failure of a uniform Besicovitch bound.
//
// Exit codes: 0 success (refuted / verified / computed), 2 constructive
// route inapplicable, 3 verification failed, 1 any error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carnot/carnot.hpp"

namespace {

using namespace carnot;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInapplicable = 2;
constexpr int kExitVerifyFail = 3;

struct MetricOptions {
  std::string group_name;
  std::string group_json;
  std::string gauge_name;
  std::string gauge_json;
  std::string gauge_form = "coordinate";
  std::vector<double> gauge_c;
  std::vector<double> gauge_gamma;

  void attach(CLI::App* cmd) {
    cmd->add_option("--group", group_name,
                    "built-in group (heisenberg1, free_nilpotent_2_3, abelianN)");
    cmd->add_option("--group-json", group_json, "path to a group JSON file");
    cmd->add_option("--gauge", gauge_name, "named gauge (euclidean)");
    cmd->add_option("--gauge-json", gauge_json, "path to a gauge JSON file");
    cmd->add_option("--gauge-form", gauge_form, "inline gauge form: coordinate|layer");
    cmd->add_option("--gauge-c", gauge_c, "inline gauge coefficients");
    cmd->add_option("--gauge-gamma", gauge_gamma, "inline gauge exponents");
  }

  GroupSpec resolve_group() const {
    int sources = (!group_name.empty()) + (!group_json.empty());
    if (sources != 1) throw DomainError("exactly one of --group/--group-json is required");
    if (!group_json.empty()) return group_from_json(load_json_file(group_json));
    auto g = builtin_group(group_name);
    if (!g) throw DomainError("unknown group: " + group_name);
    return *g;
  }

  GaugeBall resolve_gauge(const GroupSpec& g) const {
    int sources = (!gauge_name.empty()) + (!gauge_json.empty()) + (!gauge_c.empty());
    if (sources != 1)
      throw DomainError("exactly one of --gauge/--gauge-json/--gauge-c is required");
    if (!gauge_json.empty()) return gauge_from_json(load_json_file(gauge_json));
    if (!gauge_c.empty()) {
      GaugeForm form;
      if (gauge_form == "coordinate")
        form = GaugeForm::coordinate;
      else if (gauge_form == "layer")
        form = GaugeForm::layer;
      else
        throw DomainError("--gauge-form must be coordinate or layer");
      return GaugeBall(form, gauge_c, gauge_gamma);
    }
    if (gauge_name == "euclidean") return GaugeBall::euclidean(g.dim());
    throw DomainError("unknown gauge: " + gauge_name);
  }
};

struct PlaneOptions {
  double a = 0.0, b = 0.0, s = 0.0, alpha = 1.0, beta = 1.0;
  bool given() const { return a > 0.0 || b > 0.0 || s > 0.0; }
  PlaneModel resolve() const {
    PlaneModel m{s, a, b, alpha, beta};
    m.validate();
    return m;
  }
  void attach(CLI::App* cmd) {
    cmd->add_option("--plane-a", a, "plane model horizontal exponent");
    cmd->add_option("--plane-b", b, "plane model vertical exponent");
    cmd->add_option("--plane-s", s, "plane model vertical weight");
    cmd->add_option("--plane-alpha", alpha, "plane model horizontal coefficient");
    cmd->add_option("--plane-beta", beta, "plane model vertical coefficient");
  }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CARNOT_GAUGE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw DomainError("CARNOT_GAUGE_SEED is not an unsigned integer");
    }
  }
  return 0;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open output file: " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

std::vector<double> parse_coords(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size()) throw DomainError("bad coordinate list: " + text);
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty coordinate list");
  return out;
}

int cmd_refute(const MetricOptions& metric, int N, double r, double margin, double tol,
               const std::string& out_path, const std::string& csv_path, long heuristic_budget,
               std::uint64_t seed) {
  GroupSpec g = metric.resolve_group();
  GaugeBall ball = metric.resolve_gauge(g);
  PipelineOptions opts;
  opts.N = N;
  opts.r = r;
  opts.margin = margin;
  opts.tol = tol;
  opts.seed = seed;
  if (heuristic_budget > 0) {
    opts.heuristic_on_inapplicable = true;
    opts.heuristic_budget = heuristic_budget;
  }
  PipelineReport rep = wbcp_refutation_pipeline(g, ball, opts);
  json j = pipeline_report_to_json(rep);
  if (rep.refuted && !out_path.empty()) {
    FamilyDocument doc;
    doc.group_metric.emplace(g, ball);
    doc.family = *rep.lifted_family;
    write_text(out_path, family_to_json(doc).dump(2) + "\n");
    j["family_path"] = out_path;
  }
  if (rep.refuted && !csv_path.empty()) {
    std::ostringstream os;
    write_family_csv(os, *rep.lifted_family);
    write_text(csv_path, os.str());
  }
  std::cout << j.dump(2) << "\n";
  if (rep.refuted) return kExitOk;
  if (rep.verdict == "inapplicable") return kExitInapplicable;
  return kExitError;
}

int cmd_verify(const std::string& family_path, double tol) {
  FamilyDocument doc = family_from_json(load_json_file(family_path));
  VerificationReport rep;
  if (doc.family.space == BesicovitchFamily::Space::plane) {
    rep = verify_family(*doc.plane_metric, doc.family, tol);
  } else {
    QuasiDistance qd(doc.group_metric->first, doc.group_metric->second);
    rep = verify_family(qd, doc.family, tol);
  }
  std::cout << verification_to_json(rep).dump(2) << "\n";
  return rep.pass ? kExitOk : kExitVerifyFail;
}

int cmd_dist(const MetricOptions& metric, const PlaneOptions& plane, const std::string& p_text,
             const std::string& q_text) {
  std::vector<double> p = parse_coords(p_text), q = parse_coords(q_text);
  double d = 0.0;
  if (plane.given()) {
    PlaneModel m = plane.resolve();
    if (p.size() != 2 || q.size() != 2)
      throw ShapeError("plane model points need exactly 2 coordinates");
    d = plane_distance(m, PlanePoint<double>{p[0], p[1]}, PlanePoint<double>{q[0], q[1]});
  } else {
    GroupSpec g = metric.resolve_group();
    QuasiDistance qd(g, metric.resolve_gauge(g));
    if (static_cast<int>(p.size()) != g.dim() || static_cast<int>(q.size()) != g.dim())
      throw ShapeError("points must have " + std::to_string(g.dim()) + " coordinates");
    d = qd.distance(PointD{std::move(p)}, PointD{std::move(q)});
  }
  std::cout << std::setprecision(15) << std::showpoint << d << "\n";
  return kExitOk;
}

int cmd_sphere(const MetricOptions& metric, int count, std::uint64_t seed,
               const std::string& out_path) {
  GroupSpec g = metric.resolve_group();
  QuasiDistance qd(g, metric.resolve_gauge(g));
  std::ostringstream os;
  write_points_csv(os, g.dim(), qd.unit_sphere_sample(count, seed));
  emit(out_path, os.str());
  return kExitOk;
}

int cmd_quotient(const MetricOptions& metric, int samples, std::uint64_t seed,
                 const std::string& out_path) {
  GroupSpec g = metric.resolve_group();
  QuotientSpec qs(g, metric.resolve_gauge(g));
  json j;
  j["quotient_spec"] = quotient_to_json(qs);
  j["quotient_validation"] = validation_to_json(validate(qs.quotient()));
  j["submetry_report"] = submetry_to_json(submetry_check(qs, samples, seed));
  // first nondegenerate bracket pair, when one exists
  int m1 = qs.quotient().cumulative(1);
  for (int i = 1; i <= m1 && !j.contains("heisenberg_restriction"); ++i) {
    for (int jj = i + 1; jj <= m1; ++jj) {
      try {
        j["heisenberg_restriction"] = restriction_to_json(qs, heisenberg_restriction(qs, i, jj));
        break;
      } catch (const DomainError&) {
      }
    }
  }
  emit(out_path, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_validate(const MetricOptions& metric) {
  GroupSpec g = metric.resolve_group();
  ValidationReport rep = validate(g);
  std::cout << validation_to_json(rep).dump(2) << "\n";
  return rep.pass ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"computations in stratified groups with homogeneous gauge distances"};
  app.require_subcommand(1);

  auto* refute = app.add_subcommand(
      "refute", "generate and verify an arbitrarily large ball family if the gauge admits one");
  MetricOptions refute_metric;
  refute_metric.attach(refute);
  int N = 20;
  double r = 3.0, margin = 0.0, refute_tol = 1e-9;
  std::string refute_out, refute_csv;
  long heuristic_budget = 0;
  std::optional<std::uint64_t> refute_seed;
  refute->add_option("--N", N, "family size")->check(CLI::PositiveNumber);
  refute->add_option("--r", r, "horizontal spacing base");
  refute->add_option("--margin", margin, "strictness margin relative to the leading term");
  refute->add_option("--tol", refute_tol, "verification tolerance");
  refute->add_option("--out", refute_out, "write the lifted family JSON here");
  refute->add_option("--csv", refute_csv, "write the lifted family CSV here");
  refute->add_option("--heuristic-budget", heuristic_budget,
                     "run the heuristic search with this proposal budget when inapplicable");
  refute->add_option("--seed", refute_seed, "seed for the heuristic search");

  auto* verify = app.add_subcommand("verify", "check a family file against its own metric");
  std::string family_path;
  double verify_tol = 1e-9;
  verify->add_option("family", family_path, "family JSON file")->required();
  verify->add_option("--tol", verify_tol, "witness tolerance");

  auto* dist = app.add_subcommand("dist", "distance between two points");
  MetricOptions dist_metric;
  dist_metric.attach(dist);
  PlaneOptions dist_plane;
  dist_plane.attach(dist);
  std::string p_text, q_text;
  dist->add_option("-p,--p", p_text, "first point, comma-separated")->required();
  dist->add_option("-q,--q", q_text, "second point, comma-separated")->required();

  auto* sphere = app.add_subcommand("sphere", "sample the unit sphere to CSV");
  MetricOptions sphere_metric;
  sphere_metric.attach(sphere);
  int count = 100;
  std::optional<std::uint64_t> sphere_seed;
  std::string sphere_out;
  sphere->add_option("--count", count, "number of samples")->check(CLI::NonNegativeNumber);
  sphere->add_option("--seed", sphere_seed, "sampling seed");
  sphere->add_option("--out", sphere_out, "output CSV path (default stdout)");

  auto* quotient = app.add_subcommand(
      "quotient", "derive the step-2 quotient and check the projection maps balls to balls");
  MetricOptions quotient_metric;
  quotient_metric.attach(quotient);
  int samples = 1000;
  std::optional<std::uint64_t> quotient_seed;
  std::string quotient_out;
  quotient->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);
  quotient->add_option("--seed", quotient_seed, "sampling seed");
  quotient->add_option("--out", quotient_out, "output JSON path (default stdout)");

  auto* validate_cmd =
      app.add_subcommand("validate", "structural checks of a group presentation");
  MetricOptions validate_metric;
  validate_metric.attach(validate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (refute->parsed())
      return cmd_refute(refute_metric, N, r, margin, refute_tol, refute_out, refute_csv,
                        heuristic_budget, resolve_seed(refute_seed));
    if (verify->parsed()) return cmd_verify(family_path, verify_tol);
    if (dist->parsed()) return cmd_dist(dist_metric, dist_plane, p_text, q_text);
    if (sphere->parsed())
      return cmd_sphere(sphere_metric, count, resolve_seed(sphere_seed), sphere_out);
    if (quotient->parsed())
      return cmd_quotient(quotient_metric, samples, resolve_seed(quotient_seed), quotient_out);
    if (validate_cmd->parsed()) return cmd_validate(validate_metric);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
