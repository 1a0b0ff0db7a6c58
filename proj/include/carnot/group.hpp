#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/rng.hpp"
#include "carnot/xreal.hpp"

namespace carnot {

/// One summand of a bracket expansion: coefficient c on basis vector k.
struct BracketTerm {
  int k;     // 1-based target coordinate
  double c;  // structure constant
};

/// Sparse bracket row: [X_i, X_j] = sum of terms. Entries may arrive in
/// either orientation; arithmetic uses the canonicalized i < j form.
struct BracketEntry {
  int i = 0;
  int j = 0;
  std::vector<BracketTerm> terms;
};

/// Presentation of a stratified nilpotent group in exponential coordinates
/// of the first kind: step, layer dimensions and structure constants.
///
/// The constructor checks shapes only (index ranges, layer sizes);
/// mathematical soundness (antisymmetry, grading, Jacobi) is reported by
/// validate(), which must be able to receive broken presentations.
class GroupSpec {
 public:
  GroupSpec(int step, std::vector<int> layer_dims, std::vector<BracketEntry> brackets,
            std::string name = "")
      : step_(step),
        layer_dims_(std::move(layer_dims)),
        brackets_(std::move(brackets)),
        name_(std::move(name)) {
    if (step_ < 1) throw DomainError("GroupSpec: step must be >= 1");
    if (static_cast<int>(layer_dims_.size()) != step_)
      throw ShapeError("GroupSpec: layer_dims size must equal step");
    cum_.assign(step_ + 1, 0);
    for (int j = 0; j < step_; ++j) {
      if (layer_dims_[j] < 0) throw ShapeError("GroupSpec: negative layer dimension");
      cum_[j + 1] = cum_[j] + layer_dims_[j];
    }
    n_ = cum_[step_];
    if (n_ < 1) throw ShapeError("GroupSpec: total dimension must be >= 1");
    weight_.assign(n_, 0);
    for (int j = 1; j <= step_; ++j)
      for (int i = cum_[j - 1]; i < cum_[j]; ++i) weight_[i] = j;

    for (const auto& e : brackets_) {
      if (e.i < 1 || e.i > n_ || e.j < 1 || e.j > n_)
        throw ShapeError("GroupSpec: bracket index out of range");
      for (const auto& t : e.terms)
        if (t.k < 1 || t.k > n_) throw ShapeError("GroupSpec: bracket target out of range");
    }
    build_canonical();
  }

  int step() const { return step_; }
  int dim() const { return n_; }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  /// m_j: number of coordinates in layers 1..j (m_0 = 0).
  int cumulative(int j) const { return cum_[j]; }
  int first_layer_dim() const { return cum_[1]; }
  /// Layer of coordinate i (1-based coordinate, returns 1..step).
  int weight(int i) const { return weight_[i - 1]; }
  const std::string& name() const { return name_; }
  const std::vector<BracketEntry>& brackets() const { return brackets_; }
  const std::vector<BracketEntry>& canonical_brackets() const { return canonical_; }
  bool abelian() const { return canonical_.empty(); }

  /// Summed coefficients per ordered (i, j) pair exactly as given,
  /// duplicates accumulated. Used by validate().
  std::map<std::pair<int, int>, std::map<int, double>> effective_constants() const {
    std::map<std::pair<int, int>, std::map<int, double>> eff;
    for (const auto& e : brackets_)
      for (const auto& t : e.terms) eff[{e.i, e.j}][t.k] += t.c;
    return eff;
  }

 private:
  void build_canonical() {
    auto eff = effective_constants();
    std::map<std::pair<int, int>, std::map<int, double>> canon;
    for (const auto& [ij, terms] : eff) {
      auto [i, j] = ij;
      if (i == j) continue;  // flagged by validate, meaningless for arithmetic
      if (i < j) {
        canon[{i, j}] = terms;  // preferred orientation wins if both present
      } else if (!eff.count({j, i})) {
        auto& dst = canon[{j, i}];
        for (const auto& [k, c] : terms) dst[k] = -c;
      }
    }
    canonical_.clear();
    for (const auto& [ij, terms] : canon) {
      BracketEntry e;
      e.i = ij.first;
      e.j = ij.second;
      for (const auto& [k, c] : terms)
        if (c != 0.0) e.terms.push_back({k, c});
      if (!e.terms.empty()) canonical_.push_back(std::move(e));
    }
  }

  int step_;
  std::vector<int> layer_dims_;
  std::vector<int> cum_;
  int n_ = 0;
  std::vector<int> weight_;
  std::vector<BracketEntry> brackets_;
  std::vector<BracketEntry> canonical_;
  std::string name_;
};

/// Group element in exponential coordinates of the first kind.
template <class S>
struct Point {
  std::vector<S> c;

  Point() = default;
  explicit Point(std::vector<S> coords) : c(std::move(coords)) {}

  static Point zero(int n) { return Point(std::vector<S>(n, S(0.0))); }

  int size() const { return static_cast<int>(c.size()); }
  S& operator[](int i) { return c[i]; }
  const S& operator[](int i) const { return c[i]; }

  bool is_zero() const {
    for (const auto& v : c)
      if (v != S(0.0)) return false;
    return true;
  }
};

using PointD = Point<double>;
using PointX = Point<XReal>;

inline PointX to_xreal(const PointD& p) {
  PointX out;
  out.c.reserve(p.c.size());
  for (double v : p.c) out.c.emplace_back(v);
  return out;
}

inline PointD to_double(const PointX& p) {
  PointD out;
  out.c.reserve(p.c.size());
  for (const auto& v : p.c) out.c.push_back(v.to_double());
  return out;
}

namespace detail {

inline void check_point(const GroupSpec& g, int size, const char* what) {
  if (size != g.dim()) throw ShapeError(std::string(what) + ": dimension mismatch");
}

/// out += scale * [u, v] using the canonical structure constants.
template <class S>
void add_bracket(const GroupSpec& g, const std::vector<S>& u, const std::vector<S>& v,
                 double scale, std::vector<S>& out) {
  for (const auto& e : g.canonical_brackets()) {
    S coef = u[e.i - 1] * v[e.j - 1] - u[e.j - 1] * v[e.i - 1];
    for (const auto& t : e.terms) out[t.k - 1] += (scale * t.c) * coef;
  }
}

}  // namespace detail

/// Group product via the degree-3 truncated series
///   Z = X + Y + 1/2 [X,Y] + 1/12 ([X,[X,Y]] - [Y,[X,Y]]),
/// which is the exact product for step <= 3. Higher steps are rejected.
template <class S>
Point<S> multiply(const GroupSpec& g, const Point<S>& p, const Point<S>& q) {
  if (g.step() > 3)
    throw UnsupportedStepError("multiply: truncated product supports step <= 3");
  detail::check_point(g, p.size(), "multiply(p)");
  detail::check_point(g, q.size(), "multiply(q)");
  const int n = g.dim();
  Point<S> out = Point<S>::zero(n);
  for (int i = 0; i < n; ++i) out.c[i] = p.c[i] + q.c[i];
  if (!g.abelian()) {
    detail::add_bracket(g, p.c, q.c, 0.5, out.c);
    if (g.step() >= 3) {
      std::vector<S> w(n, S(0.0));
      detail::add_bracket(g, p.c, q.c, 1.0, w);
      detail::add_bracket(g, p.c, w, 1.0 / 12.0, out.c);
      detail::add_bracket(g, q.c, w, -1.0 / 12.0, out.c);
    }
  }
  return out;
}

/// exp(X)^(-1) = exp(-X): inversion is coordinatewise negation.
template <class S>
Point<S> inverse(const GroupSpec& g, const Point<S>& p) {
  detail::check_point(g, p.size(), "inverse");
  Point<S> out = p;
  for (auto& v : out.c) v = -v;
  return out;
}

/// Dilation: coordinate of weight w scales by lambda^w.
template <class S, class L>
Point<S> dilate(const GroupSpec& g, const L& lambda, const Point<S>& p) {
  S lam(lambda);
  if (!(lam > S(0.0))) throw DomainError("dilate: lambda must be > 0");
  detail::check_point(g, p.size(), "dilate");
  Point<S> out = p;
  S pw = lam;
  for (int j = 1; j <= g.step(); ++j) {
    for (int i = g.cumulative(j - 1); i < g.cumulative(j); ++i) out.c[i] = out.c[i] * pw;
    if (j < g.step()) pw = pw * lam;
  }
  return out;
}

/// Embed a 2-vector on the (first-layer coordinate i, top coordinate n)
/// plane; all other coordinates zero.
template <class S>
Point<S> plane_embed(const GroupSpec& g, int i, const S& x, const S& y) {
  if (i < 1 || i > g.first_layer_dim())
    throw ShapeError("plane_embed: index not in the first layer");
  Point<S> out = Point<S>::zero(g.dim());
  out.c[i - 1] = x;
  out.c[g.dim() - 1] = y;
  return out;
}

// ---------------------------------------------------------------------------
// Structural validation

struct ValidationOptions {
  double tol = 1e-10;
  int associativity_samples = 1000;
  std::uint64_t seed = 20240501;
  double coord_range = 1.0;
};

struct ValidationReport {
  double antisymmetry_residual = 0.0;
  double grading_residual = 0.0;
  double jacobi_residual = 0.0;
  double associativity_residual = 0.0;
  bool associativity_sampled = false;
  bool pass = false;
  std::vector<std::string> violations;
};

/// Checks antisymmetry and grading of the given structure constants, the
/// Jacobi identity on all basis triples, and (for step <= 3) samples
/// associativity of the product on random triples.
inline ValidationReport validate(const GroupSpec& g, const ValidationOptions& opts = {}) {
  ValidationReport rep;
  auto eff = g.effective_constants();

  for (const auto& [ij, terms] : eff) {
    auto [i, j] = ij;
    if (i == j) {
      for (const auto& [k, c] : terms) {
        if (std::fabs(c) > rep.antisymmetry_residual) rep.antisymmetry_residual = std::fabs(c);
        if (std::fabs(c) > opts.tol)
          rep.violations.push_back("nonzero [X" + std::to_string(i) + ",X" +
                                   std::to_string(i) + "] coefficient");
      }
      continue;
    }
    if (i < j && eff.count({j, i})) {
      const auto& rev = eff.at({j, i});
      std::map<int, double> keys = terms;
      for (const auto& [k, c] : rev) keys.emplace(k, 0.0);
      for (const auto& [k, unused] : keys) {
        double a = terms.count(k) ? terms.at(k) : 0.0;
        double b = rev.count(k) ? rev.at(k) : 0.0;
        double r = std::fabs(a + b);
        if (r > rep.antisymmetry_residual) rep.antisymmetry_residual = r;
        if (r > opts.tol)
          rep.violations.push_back("antisymmetry: c^" + std::to_string(k) + "_{" +
                                   std::to_string(i) + "," + std::to_string(j) +
                                   "} inconsistent with reverse orientation");
      }
    }
    for (const auto& [k, c] : terms) {
      if (c != 0.0 && g.weight(k) != g.weight(i) + g.weight(j)) {
        if (std::fabs(c) > rep.grading_residual) rep.grading_residual = std::fabs(c);
        rep.violations.push_back("grading: [X" + std::to_string(i) + ",X" +
                                 std::to_string(j) + "] hits X" + std::to_string(k) +
                                 " of wrong weight");
      }
    }
  }

  // Jacobi identity on basis triples, using the canonical constants.
  const int n = g.dim();
  auto basis = [&](int i) {
    std::vector<double> e(n, 0.0);
    e[i - 1] = 1.0;
    return e;
  };
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      for (int k = j + 1; k <= n; ++k) {
        std::vector<double> acc(n, 0.0);
        auto cyc = [&](int a, int b, int c) {
          std::vector<double> ab(n, 0.0);
          detail::add_bracket(g, basis(a), basis(b), 1.0, ab);
          detail::add_bracket(g, ab, basis(c), 1.0, acc);
        };
        cyc(i, j, k);
        cyc(j, k, i);
        cyc(k, i, j);
        for (double v : acc)
          if (std::fabs(v) > rep.jacobi_residual) rep.jacobi_residual = std::fabs(v);
      }
  if (rep.jacobi_residual > opts.tol)
    rep.violations.push_back("Jacobi identity fails on a basis triple");

  if (g.step() <= 3 && opts.associativity_samples > 0) {
    rep.associativity_sampled = true;
    Rng rng(opts.seed);
    auto rand_point = [&] {
      PointD p = PointD::zero(n);
      for (int i = 0; i < n; ++i) p.c[i] = rng.uniform(-opts.coord_range, opts.coord_range);
      return p;
    };
    for (int t = 0; t < opts.associativity_samples; ++t) {
      PointD p = rand_point(), q = rand_point(), w = rand_point();
      PointD lhs = multiply(g, multiply(g, p, q), w);
      PointD rhs = multiply(g, p, multiply(g, q, w));
      for (int i = 0; i < n; ++i) {
        double r = std::fabs(lhs.c[i] - rhs.c[i]);
        if (r > rep.associativity_residual) rep.associativity_residual = r;
      }
    }
    if (rep.associativity_residual > opts.tol)
      rep.violations.push_back("sampled associativity residual above tolerance");
  }

  rep.pass = rep.antisymmetry_residual <= opts.tol && rep.grading_residual <= opts.tol &&
             rep.jacobi_residual <= opts.tol && rep.associativity_residual <= opts.tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Built-in presentations

/// First Heisenberg group: layers (2, 1), [X1, X2] = X3.
inline GroupSpec heisenberg1() {
  return GroupSpec(2, {2, 1}, {{1, 2, {{3, 1.0}}}}, "heisenberg1");
}

/// Free nilpotent group on 2 generators of step 3: layers (2, 1, 2),
/// [X1,X2] = X3, [X1,X3] = X4, [X2,X3] = X5.
inline GroupSpec free_nilpotent_2_3() {
  return GroupSpec(3, {2, 1, 2},
                   {{1, 2, {{3, 1.0}}}, {1, 3, {{4, 1.0}}}, {2, 3, {{5, 1.0}}}},
                   "free_nilpotent_2_3");
}

/// Abelian group with prescribed coordinate weights (non-decreasing,
/// >= 1); layer dimensions are the weight multiplicities and intermediate
/// layers may be empty.
inline GroupSpec abelian(const std::vector<int>& weights, std::string name = "") {
  if (weights.empty()) throw ShapeError("abelian: needs at least one coordinate");
  int prev = 1;
  for (int w : weights) {
    if (w < prev) throw DomainError("abelian: weights must be non-decreasing");
    if (w < 1) throw DomainError("abelian: weights must be >= 1");
    prev = w;
  }
  int step = weights.back();
  std::vector<int> dims(step, 0);
  for (int w : weights) dims[w - 1] += 1;
  if (name.empty()) name = "abelian" + std::to_string(weights.size());
  return GroupSpec(step, dims, {}, std::move(name));
}

/// Resolve a built-in presentation by name: "heisenberg1",
/// "free_nilpotent_2_3" or "abelianN" (N weight-1 coordinates).
inline std::optional<GroupSpec> builtin_group(const std::string& name) {
  if (name == "heisenberg1") return heisenberg1();
  if (name == "free_nilpotent_2_3") return free_nilpotent_2_3();
  if (name.rfind("abelian", 0) == 0 && name.size() > 7) {
    int n = 0;
    for (std::size_t i = 7; i < name.size(); ++i) {
      if (name[i] < '0' || name[i] > '9') return std::nullopt;
      n = n * 10 + (name[i] - '0');
    }
    if (n >= 1 && n <= 64) return abelian(std::vector<int>(n, 1), name);
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace carnot
