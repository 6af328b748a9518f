#pragma once

// Finite-dimensional embedded manifolds cut out by constraints, smooth maps
// with checked differentials, pairs (M, M0), tubular embeddings and the
// induced map on normal bundles.

#include "dnclab/errors.hpp"
#include "dnclab/linalg.hpp"
#include "dnclab/random.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dnclab {

using Index = Eigen::Index;
using VectorFn = std::function<Vector(const Vector&)>;
using MatrixFn = std::function<Matrix(const Vector&)>;

struct SmoothMap {
  Index domain_dim = 0;
  Index codomain_dim = 0;
  VectorFn evaluate;
  /// Optional; when present it must agree with central differences.
  MatrixFn analytic_jacobian;

  Vector operator()(const Vector& x) const {
    if (x.size() != domain_dim)
      throw DomainError("map expects dimension " + std::to_string(domain_dim) + ", got " + std::to_string(x.size()));
    return evaluate(x);
  }

  static SmoothMap identity(Index n) {
    return {n, n, [](const Vector& x) { return x; }, [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); }};
  }

  static SmoothMap linear(const Matrix& a) {
    return {a.cols(), a.rows(), [a](const Vector& x) { return Vector(a * x); }, [a](const Vector&) { return a; }};
  }

  /// Restriction to no output: used for manifolds without constraints.
  static SmoothMap none(Index n) {
    return {n, 0, [](const Vector&) { return Vector(0); }, [n](const Vector&) { return Matrix(0, n); }};
  }
};

struct JacobianOptions {
  /// Step; 0 selects 1e-5 * (1 + |x|).
  double h = 0.0;
  bool richardson = false;
};

inline double default_step(const Vector& x) { return 1e-5 * (1.0 + x.norm()); }

/// Central-difference Jacobian.
inline Matrix jacobian(const SmoothMap& f, const Vector& x, const JacobianOptions& opts = {}) {
  if (x.size() != f.domain_dim) throw DomainError("jacobian: point has wrong dimension");
  if (opts.h < 0.0 || !std::isfinite(opts.h)) throw DomainError("jacobian: step must be positive");
  const double h = opts.h > 0.0 ? opts.h : default_step(x);
  auto central = [&](double step) {
    Matrix j(f.codomain_dim, f.domain_dim);
    Vector xp = x, xm = x;
    for (Index i = 0; i < x.size(); ++i) {
      xp[i] = x[i] + step;
      xm[i] = x[i] - step;
      j.col(i) = (f(xp) - f(xm)) / (2.0 * step);
      xp[i] = xm[i] = x[i];
    }
    return j;
  };
  if (!opts.richardson) return central(h);
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

/// Analytic Jacobian when available, central differences otherwise.
inline Matrix differential(const SmoothMap& f, const Vector& x) {
  if (f.analytic_jacobian) return f.analytic_jacobian(x);
  return jacobian(f, x);
}

struct JacobianCheck {
  std::vector<double> steps;
  std::vector<double> errors;
  double slope = 0.0;
  bool exact = false;
};

/// Compares the analytic Jacobian to central differences over ten halvings
/// of the step. Passes when the error is at rounding level throughout or
/// decays with observed order >= 1.9. Throws JacobianMismatch otherwise.
inline JacobianCheck check_jacobian(const SmoothMap& f, const Vector& x, double h0 = 0.05) {
  if (!f.analytic_jacobian) throw DomainError("check_jacobian: no analytic Jacobian supplied");
  const Matrix a = f.analytic_jacobian(x);
  JacobianCheck out;
  std::vector<double> hs, es;
  for (int k = 0; k < 10; ++k) {
    const double h = h0 * std::ldexp(1.0, -k) * (1.0 + x.norm());
    const double e = linalg::max_abs(Matrix(jacobian(f, x, {.h = h}) - a));
    out.steps.push_back(h);
    out.errors.push_back(e);
    // Below this floor the error is dominated by cancellation, not truncation.
    if (e > 1e-9 * (1.0 + linalg::max_abs(a))) {
      hs.push_back(h);
      es.push_back(e);
    }
  }
  if (hs.size() < 3) {
    out.exact = true;
    if (out.errors.back() > 1e-6)
      throw JacobianMismatch("analytic Jacobian differs from finite differences by " + std::to_string(out.errors.back()));
    return out;
  }
  out.slope = linalg::loglog_slope(hs, es);
  if (out.slope < 1.9 || out.errors.back() > 1e-4)
    throw JacobianMismatch("finite-difference error does not decay like h^2 (slope " + std::to_string(out.slope) +
                           ", final error " + std::to_string(out.errors.back()) + ")");
  return out;
}

inline SmoothMap compose(const SmoothMap& g, const SmoothMap& f) {
  if (g.domain_dim != f.codomain_dim) throw DomainError("compose: dimensions do not chain");
  SmoothMap h{f.domain_dim, g.codomain_dim, [g, f](const Vector& x) { return g(f(x)); }, {}};
  if (g.analytic_jacobian && f.analytic_jacobian)
    h.analytic_jacobian = [g, f](const Vector& x) { return Matrix(g.analytic_jacobian(f(x)) * f.analytic_jacobian(x)); };
  return h;
}

/// (f x g)(x, y) = (f(x), g(y)).
inline SmoothMap product(const SmoothMap& f, const SmoothMap& g) {
  const Index n1 = f.domain_dim, n2 = g.domain_dim, m1 = f.codomain_dim, m2 = g.codomain_dim;
  SmoothMap h{n1 + n2, m1 + m2,
              [=](const Vector& z) { return linalg::concat(f(z.head(n1)), g(z.tail(n2))); }, {}};
  h.analytic_jacobian = [=](const Vector& z) {
    Matrix j = Matrix::Zero(m1 + m2, n1 + n2);
    j.topLeftCorner(m1, n1) = differential(f, z.head(n1));
    j.bottomRightCorner(m2, n2) = differential(g, z.tail(n2));
    return j;
  };
  return h;
}

// ---------------------------------------------------------------------------
// Implicit manifolds

struct ImplicitManifold {
  std::string name;
  Index ambient_dim = 0;
  Index dim = 0;
  /// R^D -> R^m with m >= D - dim; the zero set, restricted to the domain,
  /// is the manifold and the Jacobian has rank D - dim on it.
  SmoothMap constraints;
  /// Open subset of R^D the manifold lives in; empty means all of R^D.
  std::function<bool(const Vector&)> domain;
  /// Draws points on the manifold.
  std::function<Vector(Rng&)> sampler;
  std::vector<Vector> samples;

  Index codim() const { return ambient_dim - dim; }

  double residual(const Vector& x) const {
    if (x.size() != ambient_dim) return std::numeric_limits<double>::infinity();
    if (domain && !domain(x)) return std::numeric_limits<double>::infinity();
    const Vector g = constraints(x);
    return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  }

  bool contains(const Vector& x, double tol = 1e-8) const { return residual(x) <= tol; }

  Matrix constraint_jacobian(const Vector& x) const { return differential(constraints, x); }

  Vector sample(Rng& rng) const {
    if (sampler) return sampler(rng);
    if (samples.empty()) throw DomainError("manifold " + name + " has neither sampler nor samples");
    return samples[static_cast<std::size_t>(rng.integer(0, static_cast<int>(samples.size()) - 1))];
  }

  std::vector<Vector> draw(Rng& rng, int n) const {
    std::vector<Vector> out;
    for (int i = 0; i < n; ++i) out.push_back(sample(rng));
    return out;
  }
};

inline void require_on(const ImplicitManifold& m, const Vector& x, double tol = 1e-8) {
  const double r = m.residual(x);
  if (!(r <= tol)) {
    std::ostringstream s;
    s << "point not on " << m.name << " (residual " << r << ")";
    throw OffManifold(s.str());
  }
}

/// Orthonormal basis of T_x M.
inline Matrix tangent_space(const ImplicitManifold& m, const Vector& x, const RankPolicy& policy = {}) {
  require_on(m, x);
  const Matrix j = m.constraint_jacobian(x);
  const Matrix t = j.rows() ? linalg::null_basis(j, policy) : Matrix(Matrix::Identity(m.ambient_dim, m.ambient_dim));
  if (t.cols() != m.dim)
    throw DomainError(m.name + ": tangent space has dimension " + std::to_string(t.cols()) + ", expected " +
                      std::to_string(m.dim));
  return t;
}

/// Orthogonal projector onto T_x M; smooth in x, unlike a basis.
inline Matrix tangent_projector(const ImplicitManifold& m, const Vector& x) {
  const Matrix t = tangent_space(m, x);
  return t * t.transpose();
}

struct ManifoldCheck {
  double max_residual = 0.0;
  Index min_rank = 0;
  Index max_rank = 0;
  bool ok = true;
};

/// Residual and Jacobian-rank invariants at the given points.
inline ManifoldCheck check_manifold(const ImplicitManifold& m, const std::vector<Vector>& points,
                                    const RankPolicy& policy = {}) {
  ManifoldCheck c;
  c.min_rank = std::numeric_limits<Index>::max();
  for (const Vector& x : points) {
    c.max_residual = std::max(c.max_residual, m.residual(x));
    const Index r = linalg::rank(m.constraint_jacobian(x), policy);
    c.min_rank = std::min(c.min_rank, r);
    c.max_rank = std::max(c.max_rank, r);
  }
  if (points.empty()) c.min_rank = 0;
  c.ok = c.max_residual <= 1e-9 && c.min_rank == m.codim() && c.max_rank == m.codim();
  return c;
}

struct ProjectOptions {
  int max_iterations = 50;
  double tol = 1e-10;
};

/// Gauss-Newton on the constraints with minimum-norm steps.
inline Vector newton_project(const ImplicitManifold& m, const Vector& x0, const ProjectOptions& opts = {}) {
  Vector x = x0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vector g = m.constraints(x);
    const double r = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (r <= opts.tol && (!m.domain || m.domain(x))) {
      // One extra step tightens the residual well below the tolerance.
      if (g.size() && r > 1e-14) {
        const Vector dx = linalg::min_norm_solve(m.constraint_jacobian(x), g);
        if (m.contains(x - dx, r)) x -= dx;
      }
      return x;
    }
    const Matrix j = m.constraint_jacobian(x);
    const Vector dx = linalg::min_norm_solve(j, g);
    if (!dx.allFinite() || dx.norm() < 1e-300) break;
    x -= dx;
    if (!x.allFinite()) break;
  }
  std::ostringstream s;
  s << m.name << ": Gauss-Newton did not reach the manifold in " << opts.max_iterations << " iterations";
  throw NoConvergence(s.str());
}

/// M x N with concatenated ambient coordinates.
inline ImplicitManifold product(const ImplicitManifold& a, const ImplicitManifold& b) {
  ImplicitManifold p;
  p.name = a.name + " x " + b.name;
  p.ambient_dim = a.ambient_dim + b.ambient_dim;
  p.dim = a.dim + b.dim;
  p.constraints = product(a.constraints, b.constraints);
  const Index da = a.ambient_dim, db = b.ambient_dim;
  if (a.domain || b.domain)
    p.domain = [a, b, da, db](const Vector& z) {
      return (!a.domain || a.domain(z.head(da))) && (!b.domain || b.domain(z.tail(db)));
    };
  if ((a.sampler || !a.samples.empty()) && (b.sampler || !b.samples.empty()))
    p.sampler = [a, b](Rng& rng) { return linalg::concat(a.sample(rng), b.sample(rng)); };
  for (std::size_t i = 0; i < std::min(a.samples.size(), b.samples.size()); ++i)
    p.samples.push_back(linalg::concat(a.samples[i], b.samples[i]));
  return p;
}

// ---------------------------------------------------------------------------
// Pairs and normal bundles

struct ManifoldPair {
  ImplicitManifold big;
  ImplicitManifold small;
};

/// Orthonormal basis of T_m M ⊖ T_m M0, representing ν(M, M0) at m.
inline Matrix normal_frame(const ManifoldPair& pair, const Vector& m, const RankPolicy& policy = {}) {
  require_on(pair.small, m);
  require_on(pair.big, m);
  const Matrix tb = tangent_space(pair.big, m, policy);
  const Matrix ts = tangent_space(pair.small, m, policy);
  return linalg::relative_complement(tb, ts, policy);
}

/// Orthogonal projector onto the normal representatives at m.
inline Matrix normal_projector(const ManifoldPair& pair, const Vector& m) {
  const Matrix n = normal_frame(pair, m);
  return n * n.transpose();
}

/// Frame at m obtained by projecting a reference frame into the normal
/// space at m and orthonormalizing symmetrically; smooth in m, and equal to
/// the reference at the reference point.
inline Matrix transported_frame(const ManifoldPair& pair, const Matrix& reference, const Vector& m) {
  const Matrix p = normal_projector(pair, m) * reference;
  if (p.cols() == 0) return p;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(p.transpose() * p));
  const Matrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  return p * inv_sqrt;
}

/// Map of pairs f: (M, M0) -> (N, N0).
struct PairMap {
  ManifoldPair source;
  ManifoldPair target;
  SmoothMap f;
};

inline PairMap compose(const PairMap& g, const PairMap& f) { return {f.source, g.target, compose(g.f, f.f)}; }

inline void require_pair_map_at(const PairMap& fp, const Vector& m, double tol = 1e-8) {
  require_on(fp.source.small, m);
  const Vector y = fp.f(m);
  const double r = fp.target.small.residual(y);
  if (!(r <= tol)) {
    std::ostringstream s;
    s << "f does not map " << fp.source.small.name << " into " << fp.target.small.name << " (residual " << r << ")";
    throw PreconditionFailed(s.str());
  }
}

struct NormalVector {
  Vector base;
  Vector vector;
};

/// f_*(m, [X]) = (f0(m), [Df X]), with classes represented orthogonally.
inline NormalVector normal_map_pushforward(const PairMap& fp, const Vector& m, const Vector& x) {
  require_pair_map_at(fp, m);
  const Matrix n1 = normal_frame(fp.source, m);
  if ((x - n1 * (n1.transpose() * x)).norm() > 1e-8 * std::max(1.0, x.norm()))
    throw DomainError("vector is not in the normal frame span");
  const Vector y = fp.f(m);
  const Matrix n2 = normal_frame(fp.target, y);
  const Vector dfx = differential(fp.f, m) * x;
  return {y, n2 * (n2.transpose() * dfx)};
}

// ---------------------------------------------------------------------------
// Tubular embeddings

struct TubularMap {
  ManifoldPair pair;
  /// (m in M0, X normal at m) -> point of M.
  std::function<Vector(const Vector&, const Vector&)> phi;
  /// Optional closed-form inverse q -> (m, X).
  std::function<NormalVector(const Vector&)> inverse;
  double valid_radius = 1.0;
};

/// Inverse of phi: closed form when supplied, otherwise Gauss-Newton on
/// (m, X) with M0-constraints, normality of X and phi(m, X) = q.
inline NormalVector tubular_inverse(const TubularMap& tub, const Vector& q) {
  if (tub.inverse) return tub.inverse(q);
  const Index d = tub.pair.big.ambient_dim;
  Vector m = newton_project(tub.pair.small, q);
  Vector x = normal_projector(tub.pair, m) * (q - m);
  const SmoothMap residual{2 * d, 0,
                           [&](const Vector& z) {
                             const Vector mm = z.head(d), xx = z.tail(d);
                             const Vector g = tub.pair.small.constraints(mm);
                             const Matrix ps = tangent_projector(tub.pair.small, newton_project(tub.pair.small, mm));
                             const Matrix pb = tangent_projector(tub.pair.big, newton_project(tub.pair.small, mm));
                             Vector out(d + g.size() + 2 * d);
                             out << tub.phi(mm, xx) - q, g, ps * xx, xx - pb * xx;
                             return out;
                           },
                           {}};
  Vector z = linalg::concat(m, x);
  for (int it = 0; it < 30; ++it) {
    const Vector r = residual.evaluate(z);
    if (r.cwiseAbs().maxCoeff() <= 1e-12) break;
    SmoothMap rm = residual;
    rm.codomain_dim = r.size();
    const Matrix j = jacobian(rm, z, {.h = 1e-7});
    z -= linalg::min_norm_solve(j, r);
  }
  if (residual.evaluate(z).cwiseAbs().maxCoeff() > 1e-9) throw NoConvergence("tubular inverse did not converge");
  return {z.head(d), z.tail(d)};
}

struct TubularCheck {
  double zero_section = 0.0;
  double normal_differential = 0.0;
  double image_residual = 0.0;
  bool ok = true;
};

/// phi(m, 0) = m, d/dX phi(m, 0) = id on the normal frame, and images on M
/// for |X| up to the valid radius.
inline TubularCheck check_tubular(const TubularMap& tub, const std::vector<Vector>& base_points, Rng& rng) {
  TubularCheck c;
  for (const Vector& m : base_points) {
    const Matrix n = normal_frame(tub.pair, m);
    c.zero_section = std::max(c.zero_section, (tub.phi(m, Vector::Zero(m.size())) - m).cwiseAbs().maxCoeff());
    const double h = 1e-6;
    for (Index j = 0; j < n.cols(); ++j) {
      const Vector d = (tub.phi(m, h * n.col(j)) - tub.phi(m, -h * n.col(j))) / (2.0 * h);
      c.normal_differential = std::max(c.normal_differential, (d - n.col(j)).cwiseAbs().maxCoeff());
    }
    for (int k = 0; k < 4; ++k) {
      Vector x = n * rng.normal_vector(n.cols());
      if (x.norm() > 0) x *= tub.valid_radius * rng.uniform(0.0, 0.999) / x.norm();
      c.image_residual = std::max(c.image_residual, tub.pair.big.residual(tub.phi(m, x)));
    }
  }
  c.ok = c.zero_section == 0.0 && c.normal_differential <= 1e-6 && c.image_residual <= 1e-8;
  return c;
}

// ---------------------------------------------------------------------------
// Adapted coordinates and the block structure of f_*

/// Chart of M0 near a reference point: u = T^T (n - n_ref), with the inverse
/// solved by Gauss-Newton on [constraints; T^T (n - n_ref) - u].
class SubmanifoldChart {
 public:
  SubmanifoldChart(ImplicitManifold m, Vector ref) : m_(std::move(m)), ref_(std::move(ref)) {
    t_ = tangent_space(m_, ref_);
  }

  Vector coordinates(const Vector& n) const { return t_.transpose() * (n - ref_); }

  Vector point(const Vector& u) const {
    Vector n = ref_ + t_ * u;
    for (int it = 0; it < 60; ++it) {
      const Vector g = m_.constraints(n);
      Vector r(g.size() + u.size());
      r << g, coordinates(n) - u;
      if (r.size() == 0 || r.cwiseAbs().maxCoeff() <= 1e-14) return n;
      Matrix j(r.size(), n.size());
      j << m_.constraint_jacobian(n), t_.transpose();
      const Vector dn = linalg::min_norm_solve(j, r);
      n -= dn;
      if (dn.cwiseAbs().maxCoeff() <= 1e-15) return n;
    }
    if (m_.residual(n) > 1e-10) throw NoConvergence("submanifold chart inversion failed");
    return n;
  }

  Index dim() const { return t_.cols(); }

 private:
  ImplicitManifold m_;
  Vector ref_;
  Matrix t_;
};

struct BlockStructure {
  /// Jacobian of f_* in adapted coordinates (base, fiber) x (base, fiber).
  Matrix jacobian;
  Matrix upper_right;
  double residual = 0.0;
};

struct BlockStructureOptions {
  /// Step of the difference quotient that realizes f_* through the charts.
  double h = 1e-4;
  /// Step for differentiating in adapted coordinates.
  double eta = 1e-4;
};

/// Jacobian of the induced normal-bundle map in adapted coordinates at
/// (m, X), X != 0. f_* is evaluated through the tubular charts as the
/// symmetric difference quotient (phi2^{-1} f phi1)(m, ±hX) / 2h on fibers,
/// with the base taken as the mean of the two base points; the residual is
/// the max-norm of the (base, fiber) block, which vanishes as h -> 0.
inline BlockStructure check_block_structure(const PairMap& fp, const TubularMap& t1, const TubularMap& t2,
                                            const Vector& m, const Vector& x, const BlockStructureOptions& opts = {}) {
  require_pair_map_at(fp, m);
  const Vector y = fp.f(m);
  const SubmanifoldChart c1(fp.source.small, m), c2(fp.target.small, y);
  const Matrix n1 = normal_frame(fp.source, m), n2 = normal_frame(fp.target, y);
  const Index a = c1.dim(), b = n1.cols(), a2 = c2.dim(), b2 = n2.cols();
  const Vector xi0 = n1.transpose() * x;

  auto fstar = [&](const Vector& z) {
    const Vector mu = c1.point(z.head(a));
    const Vector xv = transported_frame(fp.source, n1, mu) * z.tail(b);
    const NormalVector p = tubular_inverse(t2, fp.f(t1.phi(mu, opts.h * xv)));
    const NormalVector q = tubular_inverse(t2, fp.f(t1.phi(mu, -opts.h * xv)));
    const Vector base = 0.5 * (c2.coordinates(p.base) + c2.coordinates(q.base));
    const Vector fib = (transported_frame(fp.target, n2, p.base).transpose() * p.vector -
                        transported_frame(fp.target, n2, q.base).transpose() * q.vector) /
                       (2.0 * opts.h);
    return linalg::concat(base, fib);
  };
  const SmoothMap g{a + b, a2 + b2, fstar, {}};
  BlockStructure out;
  out.jacobian = jacobian(g, linalg::concat(Vector::Zero(a), xi0), {.h = opts.eta});
  out.upper_right = out.jacobian.topRightCorner(a2, b);
  out.residual = linalg::max_abs(out.upper_right);
  return out;
}

// ---------------------------------------------------------------------------
// Nonlinear transversality

/// Df(T_x M) + T_{f(x)} Z = T_{f(x)} N, by rank.
inline bool is_transversal_nonlinear(const SmoothMap& f, const ImplicitManifold& source, const ImplicitManifold& target,
                                     const ImplicitManifold& z, const Vector& x, const RankPolicy& policy = {}) {
  require_on(source, x);
  const Vector y = f(x);
  require_on(z, y);
  require_on(target, y);
  const Matrix tm = tangent_space(source, x, policy);
  const Matrix tz = tangent_space(z, y, policy);
  const Matrix img = differential(f, x) * tm;
  return linalg::rank(linalg::hcat(img, tz), policy) == target.dim;
}

}  // namespace dnclab
