#pragma once

// Named maps of pairs with their tubular embeddings, shared by the tests,
// the suites and the CLI.

#include "dnclab/catalog.hpp"
#include "dnclab/dnc.hpp"

namespace dnclab::fixtures {

/// A map of pairs together with tubular embeddings of source and target.
struct PairFixture {
  std::string name;
  PairMap map;
  TubularMap source_tub;
  TubularMap target_tub;
  /// Whether f is linear in the tubular coordinates (zero Taylor remainder).
  bool linear = false;
};

inline Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double c : v) x[i++] = c;
  return x;
}

inline PairFixture plane(std::string name, SmoothMap f, bool linear) {
  const ManifoldPair p = catalog::euclidean_pair(2, 1);
  const TubularMap t = catalog::linear_tubular(p);
  return {std::move(name), {p, p, std::move(f)}, t, t, linear};
}

/// f(x, y) = (x, 2y).
inline PairFixture plane_linear() {
  return plane("plane-linear", SmoothMap::linear((Matrix(2, 2) << 1, 0, 0, 2).finished()), true);
}

/// f(x, y) = (x + y^2, y(1 + x^2)).
inline PairFixture plane_quadratic() {
  return plane("plane-quadratic",
               {2, 2, [](const Vector& x) { return vec({x[0] + x[1] * x[1], x[1] * (1.0 + x[0] * x[0])}); },
                [](const Vector& x) {
                  return Matrix((Matrix(2, 2) << 1.0, 2.0 * x[1], 2.0 * x[0] * x[1], 1.0 + x[0] * x[0]).finished());
                }},
               false);
}

/// f(x, y) = (x, y + y^2).
inline PairFixture plane_taylor() {
  return plane("plane-taylor",
               {2, 2, [](const Vector& x) { return vec({x[0], x[1] + x[1] * x[1]}); },
                [](const Vector& x) { return Matrix((Matrix(2, 2) << 1.0, 0.0, 0.0, 1.0 + 2.0 * x[1]).finished()); }},
               false);
}

/// f(x, y) = (x + sin y, y + x y).
inline PairFixture plane_shear() {
  return plane("plane-shear",
               {2, 2, [](const Vector& x) { return vec({x[0] + std::sin(x[1]), x[1] + x[0] * x[1]}); },
                [](const Vector& x) {
                  return Matrix((Matrix(2, 2) << 1.0, std::cos(x[1]), x[1], 1.0 + x[0]).finished());
                }},
               false);
}

/// (S^2, equator) -> (S^2, equator), p -> normalize(x, y, z + z^2).
inline PairFixture sphere_bulge() {
  const TubularMap t = catalog::sphere_tubular(2, 1);
  SmoothMap f{3, 3,
              [](const Vector& p) {
                const Vector q = vec({p[0], p[1], p[2] + p[2] * p[2]});
                return Vector(q / q.norm());
              },
              [](const Vector& p) {
                const Vector q = vec({p[0], p[1], p[2] + p[2] * p[2]});
                const double n = q.norm();
                Matrix dq = Matrix::Identity(3, 3);
                dq(2, 2) = 1.0 + 2.0 * p[2];
                const Matrix dn = (Matrix::Identity(3, 3) - q * q.transpose() / (n * n)) / n;
                return Matrix(dn * dq);
              }};
  return {"sphere-bulge", {t.pair, t.pair, f}, t, t, false};
}

/// Rotation of S^2 about the z-axis by angle a; preserves the equator.
inline PairFixture sphere_rotation(double a = 0.7) {
  const TubularMap t = catalog::sphere_tubular(2, 1);
  Matrix r = Matrix::Identity(3, 3);
  r(0, 0) = std::cos(a);
  r(0, 1) = -std::sin(a);
  r(1, 0) = std::sin(a);
  r(1, 1) = std::cos(a);
  return {"sphere-rotation", {t.pair, t.pair, SmoothMap::linear(r)}, t, t, true};
}

/// (R^3, x-axis) -> (R^2, x-axis), f = (x + yz, y + 2z + y^2 + x z^2).
inline PairFixture space_to_plane() {
  const ManifoldPair src = catalog::euclidean_pair(3, 1), dst = catalog::euclidean_pair(2, 1);
  SmoothMap f{3, 2,
              [](const Vector& p) {
                return vec({p[0] + p[1] * p[2], p[1] + 2.0 * p[2] + p[1] * p[1] + p[0] * p[2] * p[2]});
              },
              [](const Vector& p) {
                return Matrix((Matrix(2, 3) << 1.0, p[2], p[1], p[2] * p[2], 1.0 + 2.0 * p[1],
                               2.0 + 2.0 * p[0] * p[2])
                                  .finished());
              }};
  return {"space-to-plane", {src, dst, f}, catalog::linear_tubular(src), catalog::linear_tubular(dst), false};
}

/// Nonlinear fixtures with a nonzero second-order Taylor term along their probe direction.
inline std::vector<PairFixture> taylor_fixtures() { return {plane_taylor(), sphere_bulge(), space_to_plane()}; }

/// Probe base point and normal direction for a fixture.
struct Probe {
  Vector m;
  Vector x;
};

inline Probe default_probe(const PairFixture& f) {
  if (f.map.source.big.ambient_dim == 3 && f.map.source.big.dim == 2)
    return {vec({1.0, 0.0, 0.0}), vec({0.0, 0.0, 1.0})};
  if (f.map.source.big.ambient_dim == 3) return {vec({0.5, 0.0, 0.0}), vec({0.0, 1.0, 0.5})};
  return {vec({0.0, 0.0}), vec({0.0, 1.0})};
}

/// m ∩ {x_i = 0 : i in coords}.
inline ImplicitManifold with_zero_coordinates(const ImplicitManifold& m, const std::vector<Index>& coords) {
  const Index d = m.ambient_dim, c = static_cast<Index>(coords.size());
  Matrix sel = Matrix::Zero(c, d);
  for (Index i = 0; i < c; ++i) sel(i, coords[static_cast<std::size_t>(i)]) = 1.0;
  const SmoothMap g = m.constraints;
  ImplicitManifold out;
  out.name = m.name + " cut by " + std::to_string(c) + " coordinates";
  out.ambient_dim = d;
  out.dim = m.dim - c;
  out.constraints = {d, g.codomain_dim + c, [g, sel](const Vector& x) { return linalg::concat(g(x), Vector(sel * x)); },
                     [g, sel](const Vector& x) { return linalg::vcat(differential(g, x), sel); }};
  out.domain = m.domain;
  return out;
}

/// (Z, Z0) = (y-axis, origin) inside (R^2, x-axis).
inline ManifoldPair plane_y_axis() {
  return {catalog::coordinate_subspace(2, {1}), catalog::coordinate_subspace(2, {})};
}

inline DncProblem problem(const PairFixture& f, ManifoldPair z) {
  return {f.name, f.map, f.source_tub, f.target_tub, std::move(z), true};
}

/// Pair maps with a submanifold Z of the target transverse to N0 and to f.
inline std::vector<DncProblem> dnc_problems() {
  const PairFixture id = plane("plane-identity", SmoothMap::identity(2), true);
  const ImplicitManifold s2 = catalog::sphere(2);
  return {problem(id, plane_y_axis()),
          problem(plane_shear(), plane_y_axis()),
          problem(plane_quadratic(), plane_y_axis()),
          problem(sphere_bulge(), {with_zero_coordinates(s2, {0}), with_zero_coordinates(s2, {0, 2})}),
          problem(space_to_plane(), plane_y_axis())};
}

/// f(x, y) = (x^2, y) is not transverse to the y-axis at the origin.
inline DncProblem non_transverse_problem() {
  const PairFixture fold = plane("plane-fold",
                                 {2, 2, [](const Vector& x) { return vec({x[0] * x[0], x[1]}); },
                                  [](const Vector& x) { return Matrix((Matrix(2, 2) << 2.0 * x[0], 0.0, 0.0, 1.0).finished()); }},
                                 false);
  return problem(fold, plane_y_axis());
}

/// Tangent groupoid problems: Df: TM -> TN against TZ.
inline std::vector<DncProblem> groupoid_problems() {
  const ImplicitManifold s2 = catalog::sphere(2);
  return {groupoid_problem("groupoid-plane-shear", plane_shear().map.f, catalog::diagonal_tubular_euclidean(2),
                           catalog::diagonal_tubular_euclidean(2), catalog::diagonal_pair(plane_y_axis().big)),
          groupoid_problem("groupoid-sphere-bulge", sphere_bulge().map.f, catalog::diagonal_tubular_sphere(2),
                           catalog::diagonal_tubular_sphere(2), catalog::diagonal_pair(with_zero_coordinates(s2, {0})))};
}

}  // namespace dnclab::fixtures
