#pragma once

// Built-in manifolds, pairs and tubular embeddings. Constraint Jacobians are
// analytic throughout so that rank decisions do not inherit nested
// finite-difference noise.

#include "dnclab/geometry.hpp"

#include <cmath>
#include <numbers>

namespace dnclab::catalog {

inline ImplicitManifold euclidean(Index d) {
  ImplicitManifold m;
  m.name = "R^" + std::to_string(d);
  m.ambient_dim = d;
  m.dim = d;
  m.constraints = SmoothMap::none(d);
  m.sampler = [d](Rng& rng) { return rng.normal_vector(d); };
  return m;
}

/// span{e_i : i in kept} inside R^d.
inline ImplicitManifold coordinate_subspace(Index d, std::vector<Index> kept) {
  std::vector<bool> keep(static_cast<std::size_t>(d), false);
  for (Index i : kept) keep.at(static_cast<std::size_t>(i)) = true;
  Matrix c(0, d);
  for (Index i = 0; i < d; ++i)
    if (!keep[static_cast<std::size_t>(i)]) {
      c.conservativeResize(c.rows() + 1, d);
      c.row(c.rows() - 1) = Vector::Unit(d, i).transpose();
    }
  ImplicitManifold m;
  std::ostringstream name;
  name << "span{";
  for (std::size_t i = 0; i < kept.size(); ++i) name << (i ? "," : "") << "e" << kept[i];
  name << "} in R^" << d;
  m.name = name.str();
  m.ambient_dim = d;
  m.dim = static_cast<Index>(kept.size());
  m.constraints = SmoothMap::linear(c);
  m.sampler = [d, kept](Rng& rng) {
    Vector x = Vector::Zero(d);
    for (Index i : kept) x[i] = rng.normal();
    return x;
  };
  return m;
}

/// Leading coordinates e_0..e_{k-1} inside R^d.
inline ImplicitManifold leading_subspace(Index d, Index k) {
  std::vector<Index> kept;
  for (Index i = 0; i < k; ++i) kept.push_back(i);
  return coordinate_subspace(d, kept);
}

/// Unit sphere S^k in the first k+1 coordinates of R^d.
inline ImplicitManifold sphere(Index k, Index d = -1) {
  if (d < 0) d = k + 1;
  if (d < k + 1) throw DomainError("sphere needs ambient dimension >= k+1");
  ImplicitManifold m;
  m.name = "S^" + std::to_string(k) + (d > k + 1 ? " in R^" + std::to_string(d) : "");
  m.ambient_dim = d;
  m.dim = k;
  const Index h = k + 1;
  m.constraints = {d, 1 + d - h,
                   [h, d](const Vector& x) {
                     Vector g(1 + d - h);
                     g[0] = x.head(h).squaredNorm() - 1.0;
                     g.tail(d - h) = x.tail(d - h);
                     return g;
                   },
                   [h, d](const Vector& x) {
                     Matrix j = Matrix::Zero(1 + d - h, d);
                     j.row(0).head(h) = 2.0 * x.head(h).transpose();
                     j.bottomRightCorner(d - h, d - h).setIdentity();
                     return j;
                   }};
  m.sampler = [h, d](Rng& rng) { return linalg::resized(rng.unit_vector(h), d); };
  return m;
}

inline ImplicitManifold circle(double radius = 1.0, Vector center = Vector::Zero(2)) {
  ImplicitManifold m;
  m.name = "circle";
  m.ambient_dim = 2;
  m.dim = 1;
  m.constraints = {2, 1,
                   [radius, center](const Vector& x) {
                     return Vector::Constant(1, (x - center).squaredNorm() - radius * radius);
                   },
                   [center](const Vector& x) { return Matrix(2.0 * (x - center).transpose()); }};
  m.sampler = [radius, center](Rng& rng) {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return Vector(center + radius * Vector((Vector(2) << std::cos(t), std::sin(t)).finished()));
  };
  return m;
}

inline ImplicitManifold torus(double big_r = 2.0, double small_r = 0.5) {
  ImplicitManifold m;
  m.name = "torus";
  m.ambient_dim = 3;
  m.dim = 2;
  m.constraints = {3, 1,
                   [=](const Vector& x) {
                     const double rho = std::hypot(x[0], x[1]);
                     return Vector::Constant(1, (rho - big_r) * (rho - big_r) + x[2] * x[2] - small_r * small_r);
                   },
                   [=](const Vector& x) {
                     const double rho = std::hypot(x[0], x[1]);
                     const double c = 2.0 * (rho - big_r) / rho;
                     return Matrix((Matrix(1, 3) << c * x[0], c * x[1], 2.0 * x[2]).finished());
                   }};
  m.domain = [](const Vector& x) { return std::hypot(x[0], x[1]) > 1e-9; };
  m.sampler = [=](Rng& rng) {
    const double u = rng.uniform(0.0, 2.0 * std::numbers::pi), v = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return Vector((Vector(3) << (big_r + small_r * std::cos(v)) * std::cos(u),
                   (big_r + small_r * std::cos(v)) * std::sin(u), small_r * std::sin(v))
                      .finished());
  };
  return m;
}

/// Graph {(x, g(x))} of g: R^n -> R^m.
inline ImplicitManifold graph(const SmoothMap& g, std::string name = "graph") {
  const Index n = g.domain_dim, k = g.codomain_dim;
  ImplicitManifold m;
  m.name = std::move(name);
  m.ambient_dim = n + k;
  m.dim = n;
  m.constraints = {n + k, k, [g, n, k](const Vector& z) { return Vector(z.tail(k) - g(z.head(n))); },
                   [g, n, k](const Vector& z) {
                     Matrix j(k, n + k);
                     j.leftCols(n) = -differential(g, z.head(n));
                     j.rightCols(k).setIdentity();
                     return j;
                   }};
  m.sampler = [g, n](Rng& rng) {
    const Vector x = rng.normal_vector(n);
    return linalg::concat(x, g(x));
  };
  return m;
}

/// Open ball as a codimension-zero manifold.
inline ImplicitManifold open_ball(Index d, double radius = 1.0) {
  ImplicitManifold m = euclidean(d);
  m.name = "ball(" + std::to_string(radius) + ") in R^" + std::to_string(d);
  m.domain = [radius](const Vector& x) { return x.norm() < radius; };
  m.sampler = [d, radius](Rng& rng) { return Vector(rng.unit_vector(d) * radius * std::pow(rng.uniform(), 1.0 / d)); };
  return m;
}

// ---------------------------------------------------------------------------
// Symmetric matrices and projective space

/// Dimension of Sym(n).
inline Index sym_dim(Index n) { return n * (n + 1) / 2; }

/// Position of entry (i, j), i <= j, in the packed order (0,0),(0,1),(1,1),(0,2),...
/// so that Sym(n) coordinates are a prefix of Sym(n+1) coordinates.
inline Index sym_index(Index i, Index j) {
  if (i > j) std::swap(i, j);
  return j * (j + 1) / 2 + i;
}

/// Packs a symmetric matrix; off-diagonal entries are scaled by sqrt(2) so
/// that the Euclidean norm equals the Frobenius norm.
inline Vector svec(const Matrix& p, Index total = -1) {
  const Index n = p.rows();
  Vector v = Vector::Zero(total < 0 ? sym_dim(n) : total);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) v[sym_index(i, j)] = i == j ? p(i, i) : std::numbers::sqrt2 * p(i, j);
  return v;
}

inline Matrix smat(const Vector& v, Index n) {
  Matrix p(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) {
      const double c = i == j ? v[sym_index(i, j)] : v[sym_index(i, j)] / std::numbers::sqrt2;
      p(i, j) = p(j, i) = c;
    }
  return p;
}

/// Side length n of Sym(n) from its packed dimension.
inline Index sym_side(Index packed) {
  Index n = 0;
  while (sym_dim(n) < packed) ++n;
  if (sym_dim(n) != packed) throw DomainError("not a packed symmetric dimension");
  return n;
}

/// RP^k as rank-one orthogonal projectors P (P^2 = P, tr P = 1) supported in
/// the leading (k+1)x(k+1) block of Sym(n+1), n >= k.
inline ImplicitManifold projective(Index k, Index n = -1) {
  if (n < 0) n = k;
  if (n < k) throw DomainError("projective space needs n >= k");
  const Index side = n + 1, d = sym_dim(side), inner = sym_dim(k + 1);
  ImplicitManifold m;
  m.name = "RP^" + std::to_string(k) + (n > k ? " in Sym(" + std::to_string(side) + ")" : "");
  m.ambient_dim = d;
  m.dim = k;
  const Index rows = d + 1 + (d - inner);
  m.constraints = {d, rows,
                   [=](const Vector& v) {
                     const Matrix p = smat(v, side);
                     Vector g(rows);
                     g.head(d) = svec(Matrix(p * p - p));
                     g[d] = p.trace() - 1.0;
                     g.tail(d - inner) = v.tail(d - inner);
                     return g;
                   },
                   [=](const Vector& v) {
                     const Matrix p = smat(v, side);
                     Matrix j = Matrix::Zero(rows, d);
                     for (Index a = 0; a < d; ++a) {
                       const Matrix e = smat(Vector::Unit(d, a), side);
                       j.col(a).head(d) = svec(Matrix(p * e + e * p - e));
                       j(d, a) = e.trace();
                     }
                     j.bottomRightCorner(d - inner, d - inner).setIdentity();
                     return j;
                   }};
  m.sampler = [=](Rng& rng) {
    const Vector x = linalg::resized(rng.unit_vector(k + 1), side);
    return svec(Matrix(x * x.transpose()));
  };
  return m;
}

/// x -> xx^T from S^k (in R^{k+1}) to Sym(n+1) coordinates.
inline SmoothMap double_cover(Index k, Index n = -1) {
  if (n < 0) n = k;
  const Index side = n + 1, d = sym_dim(side), h = k + 1;
  return {h, d,
          [=](const Vector& x) {
            const Vector y = linalg::resized(x, side);
            return svec(Matrix(y * y.transpose()));
          },
          [=](const Vector& x) {
            const Vector y = linalg::resized(x, side);
            Matrix j(d, h);
            for (Index a = 0; a < h; ++a) {
              const Vector e = Vector::Unit(side, a);
              j.col(a) = svec(Matrix(e * y.transpose() + y * e.transpose()));
            }
            return j;
          }};
}

// ---------------------------------------------------------------------------
// Pairs

/// (span of big_kept, span of small_kept) inside R^d.
inline ManifoldPair linear_pair(Index d, std::vector<Index> big_kept, std::vector<Index> small_kept) {
  return {coordinate_subspace(d, std::move(big_kept)), coordinate_subspace(d, std::move(small_kept))};
}

/// (R^d, span{e_0..e_{k-1}}).
inline ManifoldPair euclidean_pair(Index d, Index k) { return {euclidean(d), leading_subspace(d, k)}; }

/// (S^k, S^j) with S^j the great sphere in the first j+1 coordinates.
inline ManifoldPair sphere_pair(Index k, Index j) {
  ImplicitManifold small = sphere(j, k + 1);
  small.name = "S^" + std::to_string(j) + " in S^" + std::to_string(k);
  return {sphere(k), small};
}

/// (M x M, diagonal).
inline ManifoldPair diagonal_pair(const ImplicitManifold& m) {
  ImplicitManifold diag;
  const Index d = m.ambient_dim;
  diag.name = "diag(" + m.name + ")";
  diag.ambient_dim = 2 * d;
  diag.dim = m.dim;
  const SmoothMap g = m.constraints;
  diag.constraints = {2 * d, g.codomain_dim + d,
                      [g, d](const Vector& z) { return linalg::concat(g(z.head(d)), z.head(d) - z.tail(d)); },
                      [g, d](const Vector& z) {
                        Matrix j = Matrix::Zero(g.codomain_dim + d, 2 * d);
                        j.topLeftCorner(g.codomain_dim, d) = differential(g, z.head(d));
                        j.bottomLeftCorner(d, d).setIdentity();
                        j.bottomRightCorner(d, d) = -Matrix::Identity(d, d);
                        return j;
                      }};
  if (m.domain) diag.domain = [m, d](const Vector& z) { return m.domain(z.head(d)) && m.domain(z.tail(d)); };
  diag.sampler = [m](Rng& rng) {
    const Vector x = m.sample(rng);
    return linalg::concat(x, x);
  };
  return {product(m, m), diag};
}

// ---------------------------------------------------------------------------
// Tubular embeddings

/// phi(m, X) = m + X for linear pairs through the origin.
inline TubularMap linear_tubular(const ManifoldPair& pair) {
  const Vector origin = Vector::Zero(pair.big.ambient_dim);
  const Matrix ts = tangent_space(pair.small, origin);
  const Matrix proj = ts * ts.transpose();
  TubularMap t;
  t.pair = pair;
  t.phi = [](const Vector& m, const Vector& x) { return Vector(m + x); };
  t.inverse = [proj](const Vector& q) {
    const Vector m = proj * q;
    return NormalVector{m, q - m};
  };
  t.valid_radius = std::numeric_limits<double>::infinity();
  return t;
}

/// Geodesic normal map on (S^k, S^j): phi(m, X) = cos|X| m + sin|X| X/|X|.
inline TubularMap sphere_tubular(Index k, Index j) {
  TubularMap t;
  t.pair = sphere_pair(k, j);
  const Index h = j + 1;
  t.phi = [](const Vector& m, const Vector& x) {
    const double r = x.norm();
    if (r == 0.0) return m;
    return Vector(std::cos(r) * m + (std::sin(r) / r) * x);
  };
  t.inverse = [h](const Vector& q) {
    const Vector head = q.head(h);
    const Index rest = q.size() - h;
    const double a = head.norm(), b = q.tail(rest).norm();
    if (a == 0.0) throw OutsideChart("point is antipodal to every base point");
    Vector m = Vector::Zero(q.size()), x = Vector::Zero(q.size());
    m.head(h) = head / a;
    if (b > 0.0) x.tail(rest) = (std::atan2(b, a) / b) * q.tail(rest);
    return NormalVector{m, x};
  };
  t.valid_radius = 1.5;
  return t;
}

/// (R^n x R^n, diagonal): phi((m, m), (w, -w)) = (m + w, m - w).
inline TubularMap diagonal_tubular_euclidean(Index n) {
  TubularMap t;
  t.pair = diagonal_pair(euclidean(n));
  t.phi = [](const Vector& m, const Vector& x) { return Vector(m + x); };
  t.inverse = [n](const Vector& q) {
    const Vector a = q.head(n), b = q.tail(n);
    const Vector mid = 0.5 * (a + b), w = 0.5 * (a - b);
    return NormalVector{linalg::concat(mid, mid), linalg::concat(w, -w)};
  };
  t.valid_radius = std::numeric_limits<double>::infinity();
  return t;
}

/// (S^k x S^k, diagonal): phi((m, m), (w, -w)) = (exp_m w, exp_m(-w)).
inline TubularMap diagonal_tubular_sphere(Index k) {
  const Index d = k + 1;
  TubularMap t;
  t.pair = diagonal_pair(sphere(k));
  auto exp = [](const Vector& m, const Vector& w) {
    const double r = w.norm();
    if (r == 0.0) return m;
    return Vector(std::cos(r) * m + (std::sin(r) / r) * w);
  };
  t.phi = [d, exp](const Vector& mm, const Vector& x) {
    const Vector m = mm.head(d), w = x.head(d);
    return linalg::concat(exp(m, w), exp(m, -w));
  };
  t.inverse = [d](const Vector& q) {
    const Vector a = q.head(d), b = q.tail(d);
    const Vector s = a + b;
    if (s.norm() < 1e-12) throw OutsideChart("antipodal pair has no midpoint");
    const Vector m = s.normalized();
    const Vector perp = a - a.dot(m) * m;
    const double pn = perp.norm();
    const Vector w = pn > 0.0 ? Vector((std::atan2(pn, a.dot(m)) / pn) * perp) : Vector(Vector::Zero(d));
    return NormalVector{linalg::concat(m, m), linalg::concat(w, -w)};
  };
  t.valid_radius = 1.5;
  return t;
}

/// A second tubular map on (R^2, x-axis): phi(m, X) = m + X + (X_y^2, 0).
inline TubularMap bent_plane_tubular() {
  TubularMap t;
  t.pair = euclidean_pair(2, 1);
  t.phi = [](const Vector& m, const Vector& x) {
    Vector q = m + x;
    q[0] += x[1] * x[1];
    return q;
  };
  t.inverse = [](const Vector& q) {
    return NormalVector{(Vector(2) << q[0] - q[1] * q[1], 0.0).finished(), (Vector(2) << 0.0, q[1]).finished()};
  };
  t.valid_radius = std::numeric_limits<double>::infinity();
  return t;
}

}  // namespace dnclab::catalog
