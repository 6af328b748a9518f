#pragma once

// The deformation space DNC(M, M0) as a point set with charts, the induced
// maps, the canonical isomorphisms for linear pairs, products and trivial
// bundles, and the tangent groupoid TM = DNC(M x M, diagonal).

#include "dnclab/geometry.hpp"
#include "dnclab/transversality.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace dnclab {

/// Interior(m, λ) with m ∈ M and λ ≠ 0, or Boundary(m, X) with m ∈ M0 and X
/// a normal representative at m (λ = 0).
struct DncPoint {
  enum class Kind { interior, boundary };

  Kind kind = Kind::interior;
  Vector m;
  Vector x;
  double lambda = 1.0;

  static DncPoint interior(Vector m, double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("interior points need a finite nonzero lambda");
    return {Kind::interior, std::move(m), Vector(0), lambda};
  }

  static DncPoint boundary(Vector m, Vector x) {
    if (m.size() != x.size()) throw DomainError("boundary point and normal vector differ in dimension");
    return {Kind::boundary, std::move(m), std::move(x), 0.0};
  }

  bool is_interior() const { return kind == Kind::interior; }
};

/// Max-norm distance; infinite across kinds.
inline double distance(const DncPoint& a, const DncPoint& b) {
  if (a.kind != b.kind || a.m.size() != b.m.size()) return std::numeric_limits<double>::infinity();
  double d = std::max(linalg::max_abs(Vector(a.m - b.m)), std::abs(a.lambda - b.lambda));
  if (!a.is_interior()) d = std::max(d, linalg::max_abs(Vector(a.x - b.x)));
  return d;
}

inline void require_normal(const ManifoldPair& pair, const Vector& m, const Vector& x, double tol = 1e-8) {
  const Matrix n = normal_frame(pair, m);
  if ((x - n * (n.transpose() * x)).norm() > tol * std::max(1.0, x.norm()))
    throw DomainError("vector is not normal to " + pair.small.name + " in " + pair.big.name);
}

inline void validate(const ManifoldPair& pair, const DncPoint& p) {
  if (p.is_interior()) {
    if (p.lambda == 0.0) throw DomainError("interior point with lambda = 0");
    require_on(pair.big, p.m);
    return;
  }
  require_on(pair.small, p.m);
  require_normal(pair, p.m, p.x);
}

// ---------------------------------------------------------------------------
// Charts

/// (m, X, t) -> (phi(m, tX), t) for t != 0 and (m, X) at t = 0.
inline DncPoint dnc_chart(const TubularMap& tub, const Vector& m, const Vector& x, double t) {
  require_on(tub.pair.small, m);
  require_normal(tub.pair, m, x);
  const double r = std::abs(t) * x.norm();
  if (!(r <= tub.valid_radius)) {
    std::ostringstream s;
    s << "|tX| = " << r << " exceeds the tubular radius " << tub.valid_radius;
    throw RadiusExceeded(s.str());
  }
  if (t == 0.0) return DncPoint::boundary(m, x);
  return DncPoint::interior(tub.phi(m, t * x), t);
}

struct ChartPoint {
  Vector m;
  Vector x;
  double t = 0.0;
};

inline ChartPoint dnc_chart_inverse(const TubularMap& tub, const DncPoint& p) {
  if (!p.is_interior()) return {p.m, p.x, 0.0};
  NormalVector nv;
  try {
    nv = tubular_inverse(tub, p.m);
  } catch (const NoConvergence& e) {
    throw OutsideChart(std::string("tubular inverse failed: ") + e.what());
  }
  if (!(nv.vector.norm() <= tub.valid_radius)) {
    std::ostringstream s;
    s << "normal component " << nv.vector.norm() << " exceeds the tubular radius " << tub.valid_radius;
    throw OutsideChart(s.str());
  }
  if ((tub.phi(nv.base, nv.vector) - p.m).norm() > 1e-9 * (1.0 + p.m.norm()))
    throw OutsideChart("point is not in the image of the tubular map");
  return {nv.base, nv.vector / p.lambda, p.lambda};
}

/// Coordinates (u, ξ, t) around a base point m0 ∈ M0: u is a chart of M0,
/// ξ the components of X in a frame transported from m0.
class DncChart {
 public:
  DncChart(TubularMap tub, const Vector& m0)
      : tub_(std::move(tub)), base_(tub_.pair.small, m0), frame_(normal_frame(tub_.pair, m0)) {}

  Index base_dim() const { return base_.dim(); }
  Index fiber_dim() const { return frame_.cols(); }
  Index dim() const { return base_dim() + fiber_dim() + 1; }
  const Matrix& frame() const { return frame_; }
  const TubularMap& tubular() const { return tub_; }

  Vector base_coordinates(const Vector& m) const { return base_.coordinates(m); }

  DncPoint point(const Vector& c) const {
    if (c.size() != dim()) throw DomainError("chart coordinates have the wrong dimension");
    const Vector mu = base_.point(c.head(base_dim()));
    const Vector x = transported_frame(tub_.pair, frame_, mu) * c.segment(base_dim(), fiber_dim());
    return dnc_chart(tub_, mu, x, c[dim() - 1]);
  }

  Vector coordinates(const DncPoint& p) const {
    const ChartPoint cp = dnc_chart_inverse(tub_, p);
    Vector c(dim());
    c << base_.coordinates(cp.m), transported_frame(tub_.pair, frame_, cp.m).transpose() * cp.x, cp.t;
    return c;
  }

 private:
  TubularMap tub_;
  SubmanifoldChart base_;
  Matrix frame_;
};

struct ChartTransition {
  /// Jacobian of the transition in (u | ξ, t) coordinates.
  Matrix jacobian;
  double upper_right = 0.0;
  double inverse_condition = 0.0;
};

/// Differential of chart_b^{-1} ∘ chart_a at the boundary point (m, X).
/// It is invertible and block lower triangular with respect to the split
/// (base | fiber, t).
inline ChartTransition chart_transition(const TubularMap& a, const TubularMap& b, const Vector& m, const Vector& x) {
  const DncChart ca(a, m), cb(b, m);
  const Vector c0 = ca.coordinates(DncPoint::boundary(m, x));
  const SmoothMap t{ca.dim(), cb.dim(), [&](const Vector& c) { return cb.coordinates(ca.point(c)); }, {}};
  ChartTransition out;
  out.jacobian = jacobian(t, c0);
  out.upper_right = linalg::max_abs(Matrix(out.jacobian.topRightCorner(cb.base_dim(), ca.fiber_dim() + 1)));
  out.inverse_condition = linalg::inverse_condition(out.jacobian);
  return out;
}

// ---------------------------------------------------------------------------
// Functoriality

/// Interior(m, λ) -> Interior(f(m), λ); Boundary(m, X) -> Boundary(f(m), [Df X]).
inline DncPoint dnc_map(const PairMap& fp, const DncPoint& p) {
  if (p.is_interior()) {
    require_on(fp.source.big, p.m);
    return DncPoint::interior(fp.f(p.m), p.lambda);
  }
  const NormalVector nv = normal_map_pushforward(fp, p.m, p.x);
  return DncPoint::boundary(nv.base, nv.vector);
}

// ---------------------------------------------------------------------------
// Linear pairs: DNC(R^D, E0) ≅ R^D x R

struct FlatPoint {
  Vector w;
  double t = 0.0;
};

/// Coordinate mask of E0 for a pair (R^D, span of coordinates); throws
/// DomainError for anything else.
inline std::vector<bool> linear_pair_mask(const ManifoldPair& pair) {
  const Index d = pair.big.ambient_dim;
  if (pair.big.dim != d || pair.big.domain || pair.small.domain || pair.small.ambient_dim != d)
    throw DomainError("not a linear pair: " + pair.big.name + " is not the whole ambient space");
  const Vector origin = Vector::Zero(d);
  if (!pair.small.contains(origin, 1e-14)) throw DomainError("not a linear pair: " + pair.small.name + " misses 0");
  const Matrix t = tangent_space(pair.small, origin);
  const Matrix p = t * t.transpose();
  std::vector<bool> mask(static_cast<std::size_t>(d));
  Vector probe = Vector::Zero(d);
  for (Index i = 0; i < d; ++i) {
    const bool in = std::abs(p(i, i) - 1.0) < 1e-12;
    if (!in && std::abs(p(i, i)) > 1e-12) throw DomainError("not a linear pair: subspace is not a coordinate span");
    mask[static_cast<std::size_t>(i)] = in;
    if (in) probe[i] = 1.5 + static_cast<double>(i);
  }
  if (!pair.small.contains(probe, 1e-12) || !pair.small.contains(Vector(-3.0 * probe), 1e-12))
    throw DomainError("not a linear pair: " + pair.small.name + " is not linear");
  return mask;
}

/// (e' + v, t) -> (e' + v/t, t) for t != 0 and (e', v) -> (e' + v, 0).
inline FlatPoint dnc_vspace_iso(const ManifoldPair& pair, const DncPoint& p) {
  const std::vector<bool> mask = linear_pair_mask(pair);
  Vector w(p.m.size());
  for (Index i = 0; i < w.size(); ++i) {
    const bool in = mask[static_cast<std::size_t>(i)];
    if (p.is_interior())
      w[i] = in ? p.m[i] : p.m[i] / p.lambda;
    else
      w[i] = in ? p.m[i] : p.x[i];
  }
  return {w, p.lambda};
}

inline DncPoint dnc_vspace_iso_inverse(const ManifoldPair& pair, const FlatPoint& f) {
  const std::vector<bool> mask = linear_pair_mask(pair);
  const Index d = f.w.size();
  if (f.t != 0.0) {
    Vector m(d);
    for (Index i = 0; i < d; ++i) m[i] = mask[static_cast<std::size_t>(i)] ? f.w[i] : f.w[i] * f.t;
    return DncPoint::interior(m, f.t);
  }
  Vector m = Vector::Zero(d), x = Vector::Zero(d);
  for (Index i = 0; i < d; ++i) (mask[static_cast<std::size_t>(i)] ? m : x)[i] = f.w[i];
  return DncPoint::boundary(m, x);
}

// ---------------------------------------------------------------------------
// Products: DNC(M x N, M0 x N0) ≅ DNC(M, M0) x_R DNC(N, N0)

inline ManifoldPair product(const ManifoldPair& a, const ManifoldPair& b) {
  return {product(a.big, b.big), product(a.small, b.small)};
}

inline PairMap product(const PairMap& f, const PairMap& g) {
  return {product(f.source, g.source), product(f.target, g.target), product(f.f, g.f)};
}

inline TubularMap product(const TubularMap& a, const TubularMap& b) {
  const Index da = a.pair.big.ambient_dim, db = b.pair.big.ambient_dim;
  TubularMap t;
  t.pair = product(a.pair, b.pair);
  t.phi = [a, b, da, db](const Vector& m, const Vector& x) {
    return linalg::concat(a.phi(m.head(da), x.head(da)), b.phi(m.tail(db), x.tail(db)));
  };
  if (a.inverse && b.inverse)
    t.inverse = [a, b, da, db](const Vector& q) {
      const NormalVector p = a.inverse(q.head(da)), r = b.inverse(q.tail(db));
      return NormalVector{linalg::concat(p.base, r.base), linalg::concat(p.vector, r.vector)};
    };
  t.valid_radius = std::min(a.valid_radius, b.valid_radius);
  return t;
}

/// `first_dim` is the ambient dimension of the first factor.
inline std::pair<DncPoint, DncPoint> dnc_product_split(const DncPoint& p, Index first_dim) {
  const Index d = p.m.size();
  if (first_dim < 0 || first_dim > d) throw DomainError("split position outside the ambient dimension");
  const Index rest = d - first_dim;
  if (p.is_interior())
    return {DncPoint::interior(p.m.head(first_dim), p.lambda), DncPoint::interior(p.m.tail(rest), p.lambda)};
  return {DncPoint::boundary(p.m.head(first_dim), p.x.head(first_dim)),
          DncPoint::boundary(p.m.tail(rest), p.x.tail(rest))};
}

inline DncPoint dnc_product_join(const DncPoint& a, const DncPoint& b) {
  if (a.kind != b.kind || a.lambda != b.lambda) {
    std::ostringstream s;
    s << "factors lie over different fibers (lambda " << a.lambda << " and " << b.lambda << ")";
    throw FiberMismatch(s.str());
  }
  if (a.is_interior()) return DncPoint::interior(linalg::concat(a.m, b.m), a.lambda);
  return DncPoint::boundary(linalg::concat(a.m, b.m), linalg::concat(a.x, b.x));
}

// ---------------------------------------------------------------------------
// Tangent groupoid

/// Pair(x, y, λ) with λ != 0, or Tangent(m, v) with λ = 0. For tangents `x`
/// is the base point and `y` the tangent vector.
struct TgElement {
  enum class Kind { pair, tangent };

  Kind kind = Kind::pair;
  Vector x;
  Vector y;
  double lambda = 1.0;

  static TgElement pair(Vector x, Vector y, double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("pair elements need a finite nonzero lambda");
    if (x.size() != y.size()) throw DomainError("pair element points differ in dimension");
    return {Kind::pair, std::move(x), std::move(y), lambda};
  }

  static TgElement tangent(Vector m, Vector v) {
    if (m.size() != v.size()) throw DomainError("tangent element point and vector differ in dimension");
    return {Kind::tangent, std::move(m), std::move(v), 0.0};
  }

  bool is_pair() const { return kind == Kind::pair; }
  const Vector& target() const { return x; }
  const Vector& source() const { return is_pair() ? y : x; }
};

inline bool operator==(const TgElement& a, const TgElement& b) {
  return a.kind == b.kind && a.lambda == b.lambda && a.x == b.x && a.y == b.y;
}

inline double distance(const TgElement& a, const TgElement& b) {
  if (a.kind != b.kind || a.x.size() != b.x.size()) return std::numeric_limits<double>::infinity();
  return std::max({linalg::max_abs(Vector(a.x - b.x)), linalg::max_abs(Vector(a.y - b.y)), std::abs(a.lambda - b.lambda)});
}

inline void validate(const ImplicitManifold& m, const TgElement& e) {
  require_on(m, e.x);
  if (e.is_pair()) {
    require_on(m, e.y);
    return;
  }
  const Matrix t = tangent_space(m, e.x);
  if ((e.y - t * (t.transpose() * e.y)).norm() > 1e-8 * std::max(1.0, e.y.norm()))
    throw DomainError("vector is not tangent to " + m.name);
}

inline TgElement tg_unit(const Vector& x, double lambda) {
  if (lambda == 0.0) return TgElement::tangent(x, Vector::Zero(x.size()));
  return TgElement::pair(x, x, lambda);
}

namespace detail {
inline bool same_point(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
}
}  // namespace detail

/// (x, y, λ)(y, z, λ) = (x, z, λ); (m, v)(m, w) = (m, v + w).
inline TgElement tg_compose(const TgElement& a, const TgElement& b) {
  if (a.lambda != b.lambda) {
    std::ostringstream s;
    s << "elements lie over lambda " << a.lambda << " and " << b.lambda;
    throw FiberMismatch(s.str());
  }
  if (!detail::same_point(a.source(), b.target())) throw NotComposable("source of the left factor is not the target of the right");
  if (a.is_pair()) return TgElement::pair(a.x, b.y, a.lambda);
  return TgElement::tangent(a.x, a.y + b.y);
}

inline TgElement tg_inverse(const TgElement& a) {
  if (a.is_pair()) return TgElement::pair(a.y, a.x, a.lambda);
  return TgElement::tangent(a.x, -a.y);
}

inline TgElement tg_map(const SmoothMap& f, const TgElement& a) {
  if (a.is_pair()) return TgElement::pair(f(a.x), f(a.y), a.lambda);
  return TgElement::tangent(f(a.x), differential(f, a.x) * a.y);
}

/// TM as DNC(M x M, diagonal): a tangent vector v is the class of
/// (v/2, -v/2), and a class (X1, X2) corresponds to X1 - X2.
inline DncPoint tg_to_dnc(const TgElement& a) {
  if (a.is_pair()) return DncPoint::interior(linalg::concat(a.x, a.y), a.lambda);
  return DncPoint::boundary(linalg::concat(a.x, a.x), linalg::concat(Vector(0.5 * a.y), Vector(-0.5 * a.y)));
}

inline TgElement tg_from_dnc(const DncPoint& p) {
  if (p.m.size() % 2 != 0) throw DomainError("groupoid points live in an even-dimensional ambient space");
  const Index d = p.m.size() / 2;
  if (p.is_interior()) return TgElement::pair(p.m.head(d), p.m.tail(d), p.lambda);
  if (!detail::same_point(p.m.head(d), p.m.tail(d))) throw DomainError("boundary point is off the diagonal");
  return TgElement::tangent(p.m.head(d), p.x.head(d) - p.x.tail(d));
}

// ---------------------------------------------------------------------------
// T(M x R^k) ≅ TM x (R^k x R^k)

struct BundleFiber {
  Vector u;
  Vector w;
};

/// Pair((m, u), (m', u'), λ) -> (Pair(m, m', λ), (u, (u - u')/λ));
/// Tangent((m, u), (v, w)) -> (Tangent(m, v), (u, w)). `base_dim` is the
/// ambient dimension of M.
inline std::pair<TgElement, BundleFiber> trivial_bundle_split(const TgElement& a, Index base_dim) {
  const Index d = a.x.size();
  if (base_dim < 0 || base_dim > d) throw FiberMismatch("base dimension exceeds the element dimension");
  const Index k = d - base_dim;
  if (a.is_pair()) {
    const Vector u = a.x.tail(k), u2 = a.y.tail(k);
    return {TgElement::pair(a.x.head(base_dim), a.y.head(base_dim), a.lambda), {u, (u - u2) / a.lambda}};
  }
  return {TgElement::tangent(a.x.head(base_dim), a.y.head(base_dim)), {a.x.tail(k), a.y.tail(k)}};
}

inline TgElement trivial_bundle_join(const TgElement& base, const BundleFiber& f) {
  if (f.u.size() != f.w.size()) throw FiberMismatch("fiber components differ in dimension");
  if (base.is_pair())
    return TgElement::pair(linalg::concat(base.x, f.u), linalg::concat(base.y, Vector(f.u - base.lambda * f.w)),
                           base.lambda);
  return TgElement::tangent(linalg::concat(base.x, f.u), linalg::concat(base.y, f.w));
}

// ---------------------------------------------------------------------------
// Taylor remainder at t -> 0

struct TaylorProbe {
  std::vector<double> t;
  std::vector<double> remainder;
  double slope = 0.0;
  /// Remainders at rounding level throughout, as for maps linear in the charts.
  bool exact = false;
};

inline std::vector<double> halving_steps(double t0 = 0.5, int count = 10) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::ldexp(t0, -i));
  return out;
}

/// r(t) = |(1/t) phi2^{-1}(f(phi1(m, tX))) - f_*(m, X)|, with the base and
/// fiber differences combined.
inline TaylorProbe taylor_probe(const PairMap& fp, const TubularMap& t1, const TubularMap& t2, const Vector& m,
                                const Vector& x, const std::vector<double>& ts) {
  const NormalVector star = normal_map_pushforward(fp, m, x);
  TaylorProbe out;
  std::vector<double> fit_t, fit_r;
  const double floor = 1e-12 * (1.0 + star.vector.norm() + star.base.norm());
  for (double t : ts) {
    if (t == 0.0) throw DomainError("taylor_probe needs nonzero t");
    const DncPoint p = dnc_chart(t1, m, x, t);
    const ChartPoint q = dnc_chart_inverse(t2, dnc_map(fp, p));
    const double r = std::hypot((q.m - star.base).norm(), (q.x - star.vector).norm());
    out.t.push_back(t);
    out.remainder.push_back(r);
    if (r > floor) {
      fit_t.push_back(std::abs(t));
      fit_r.push_back(r);
    }
  }
  if (fit_t.size() < 3) {
    out.exact = true;
    return out;
  }
  out.slope = linalg::loglog_slope(fit_t, fit_r);
  return out;
}

// ---------------------------------------------------------------------------
// Transversality of the induced map

/// f^{-1}(Z) ∩ source, cut out by the source constraints and those of Z
/// pulled back along f. Its expected dimension assumes transversality.
inline ImplicitManifold preimage(const SmoothMap& f, const ImplicitManifold& source, const ImplicitManifold& target,
                                 const ImplicitManifold& z) {
  ImplicitManifold p;
  p.name = "f^-1(" + z.name + ") in " + source.name;
  p.ambient_dim = source.ambient_dim;
  p.dim = source.dim - (target.dim - z.dim);
  const SmoothMap gs = source.constraints, gz = z.constraints;
  p.constraints = {source.ambient_dim, gs.codomain_dim + gz.codomain_dim,
                   [gs, gz, f](const Vector& x) { return linalg::concat(gs(x), gz(f(x))); },
                   [gs, gz, f](const Vector& x) {
                     return linalg::vcat(differential(gs, x), Matrix(differential(gz, f(x)) * differential(f, x)));
                   }};
  if (source.domain || z.domain)
    p.domain = [source, z, f](const Vector& x) {
      return (!source.domain || source.domain(x)) && (!z.domain || z.domain(f(x)));
    };
  return p;
}

inline ManifoldPair preimage(const PairMap& fp, const ManifoldPair& z) {
  return {preimage(fp.f, fp.source.big, fp.target.big, z.big), preimage(fp.f, fp.source.small, fp.target.small, z.small)};
}

/// Membership in DNC(Z, Z0) ⊂ DNC(N, N0) with Z0 = Z ∩ N0: interior points
/// lie on Z, boundary points lie over Z0 with normal class in the image of TZ.
inline bool dnc_contains(const ManifoldPair& ambient, const ManifoldPair& z, const DncPoint& p, double tol = 1e-7) {
  if (p.is_interior()) return z.big.residual(p.m) <= tol;
  if (!(z.small.residual(p.m) <= tol)) return false;
  const Vector n = newton_project(z.small, p.m, {.tol = 1e-12});
  const Matrix span = linalg::range_basis(linalg::hcat(tangent_space(z.big, n), tangent_space(ambient.small, n)));
  return (p.x - span * (span.transpose() * p.x)).norm() <= tol * std::max(1.0, p.x.norm());
}

/// f: (M, M0) -> (N, N0) with tubular maps on both sides, and the pair
/// (Z, Z0) of N with Z0 = Z ∩ N0.
struct DncProblem {
  std::string name;
  PairMap map;
  TubularMap source_tub;
  TubularMap target_tub;
  ManifoldPair z;
  /// Whether Z must be transverse to N0. The tangent groupoid case (Z x Z
  /// against the diagonal) drops this hypothesis.
  bool z_transverse_to_n0 = true;
};

struct DncTransversalityReport {
  Index samples = 0;
  Index members = 0;
  Index interior_checks = 0;
  Index boundary_checks = 0;
  /// Largest |d(base)/d(fiber)| of the chart-conjugated differential.
  double max_upper_right = 0.0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

namespace detail {

inline std::string point_text(const Vector& v) {
  std::ostringstream s;
  s << "(";
  for (Index i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  s << ")";
  return s.str();
}

inline ComplementedSubspace finite_complemented(const Matrix& basis, Index rows) {
  const Matrix b = linalg::range_basis(basis);
  return {Subspace(Matrix(b), rows), Subspace(linalg::orthogonal_complement(b))};
}

}  // namespace detail

/// Checks the hypotheses at every sample whose image lies in DNC(Z, Z0)
/// (PreconditionFailed names the first one that fails), then compares
/// membership on both sides and, at boundary members, tests the block
/// lower-triangular differential in charts for transversality to
/// T Z0 ⊕ ν(Z, Z0).
inline DncTransversalityReport dnc_transversality_check(const DncProblem& pb, const std::vector<DncPoint>& samples,
                                                        double tol = 1e-7) {
  const PairMap& fp = pb.map;
  const ManifoldPair pre = preimage(fp, pb.z);
  DncTransversalityReport rep;
  for (const DncPoint& p : samples) {
    ++rep.samples;
    validate(fp.source, p);
    const DncPoint q = dnc_map(fp, p);
    const bool in_target = dnc_contains(fp.target, pb.z, q, tol);
    if (in_target) {
      const Vector y = q.m;
      if (!is_transversal_nonlinear(fp.f, fp.source.big, fp.target.big, pb.z.big, p.m))
        throw PreconditionFailed("f is not transverse to " + pb.z.big.name + " at " + detail::point_text(p.m));
      if (!p.is_interior()) {
        if (pb.z_transverse_to_n0) {
          const Matrix s = linalg::hcat(tangent_space(pb.z.big, y), tangent_space(fp.target.small, y));
          if (linalg::rank(s) != fp.target.big.dim)
            throw PreconditionFailed(pb.z.big.name + " is not transverse to " + fp.target.small.name + " at " +
                                     detail::point_text(y));
        }
        if (!is_transversal_nonlinear(fp.f, fp.source.small, fp.target.small, pb.z.small, p.m))
          throw PreconditionFailed("f0 is not transverse to " + pb.z.small.name + " at " + detail::point_text(p.m));
      }
    }
    const bool in_source = dnc_contains(fp.source, pre, p, tol);
    if (in_source != in_target) {
      std::ostringstream s;
      s << (p.is_interior() ? "interior" : "boundary") << " sample at " << detail::point_text(p.m)
        << (in_source ? " lies in the preimage but its image misses DNC(Z, Z0)"
                      : " maps into DNC(Z, Z0) but is not in the preimage");
      rep.failures.push_back(s.str());
      continue;
    }
    if (!in_source) continue;
    ++rep.members;
    if (p.is_interior()) {
      ++rep.interior_checks;
      continue;
    }
    ++rep.boundary_checks;
    const DncChart c1(pb.source_tub, p.m), c2(pb.target_tub, q.m);
    const Index a = c1.base_dim(), b = c1.fiber_dim(), a2 = c2.base_dim(), b2 = c2.fiber_dim();
    const SmoothMap slice{a + b, a2 + b2,
                          [&](const Vector& z) {
                            const DncPoint pt = c1.point(linalg::concat(z, Vector::Zero(1)));
                            return Vector(c2.coordinates(dnc_map(fp, pt)).head(a2 + b2));
                          },
                          {}};
    const Vector z0 = c1.coordinates(p).head(a + b);
    const Matrix j = jacobian(slice, z0);
    rep.max_upper_right = std::max(rep.max_upper_right, linalg::max_abs(Matrix(j.topRightCorner(a2, b))));

    const Matrix tz0 = tangent_space(pb.z.small, q.m);
    Matrix v1(a2, tz0.cols());
    for (Index i = 0; i < tz0.cols(); ++i) v1.col(i) = c2.base_coordinates(q.m + tz0.col(i));
    const Matrix v2 = c2.frame().transpose() * tangent_space(pb.z.big, q.m);
    const BlockOperator op(SequenceOperator::finite(j.topLeftCorner(a2, a)),
                           FiniteRankOperator(j.bottomLeftCorner(b2, a)),
                           SequenceOperator::finite(j.bottomRightCorner(b2, b)));
    if (!is_transversal(op, detail::finite_complemented(v1, a2), detail::finite_complemented(v2, b2)))
      rep.failures.push_back("differential at boundary sample " + detail::point_text(p.m) +
                             " is not transverse to T DNC(Z, Z0)");
  }
  return rep;
}

/// Samples of DNC(M, M0) cycling through interior members, generic interior
/// points, boundary members and generic boundary points. Members are found
/// by projecting random points onto the preimage.
inline std::vector<DncPoint> dnc_samples(const DncProblem& pb, Rng& rng, int n) {
  const ManifoldPair pre = preimage(pb.map, pb.z);
  const ManifoldPair& src = pb.map.source;
  std::vector<DncPoint> out;
  auto lambda = [&] { return (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.05, 2.0); };
  for (int i = 0, attempts = 0; static_cast<int>(out.size()) < n && attempts < 20 * n; ++attempts) {
    const int kind = i % 4;
    try {
      if (kind == 0) {
        out.push_back(DncPoint::interior(newton_project(pre.big, src.big.sample(rng), {.tol = 1e-13}), lambda()));
      } else if (kind == 1) {
        out.push_back(DncPoint::interior(src.big.sample(rng), lambda()));
      } else {
        const Vector m = kind == 2 ? newton_project(pre.small, src.small.sample(rng), {.tol = 1e-13})
                                   : src.small.sample(rng);
        const Matrix nf = normal_frame(src, m);
        Vector x = nf * rng.normal_vector(nf.cols());
        if (kind == 2) {
          const Matrix tp = tangent_space(pre.big, m);
          x = nf * (nf.transpose() * (tp * rng.normal_vector(tp.cols())));
        }
        if (x.norm() > 0.0) x *= rng.uniform(0.1, 1.0) / x.norm();
        out.push_back(DncPoint::boundary(m, x));
      }
      ++i;
    } catch (const Error&) {
      // Projection failed from this start; draw another.
    }
  }
  if (static_cast<int>(out.size()) < n) throw NoConvergence("could not draw enough samples for " + pb.name);
  return out;
}

/// The groupoid form: Df: TM -> TN against TZ, as the induced map of
/// f x f on (M x M, diagonal) against (Z x Z, diagonal of Z).
inline DncProblem groupoid_problem(std::string name, const SmoothMap& f, const TubularMap& source_diag,
                                   const TubularMap& target_diag, const ManifoldPair& z_diag) {
  return {std::move(name), {source_diag.pair, target_diag.pair, product(f, f)}, source_diag, target_diag, z_diag, false};
}

}  // namespace dnclab
