#pragma once

// Δ-filtrations M_1 ⊂ M_2 ⊂ ... of a finite model of the ambient manifold,
// their constructors (linear, open subsets, spheres, projective spaces,
// products, pair groupoid, tangent bundle, tangent groupoid, subsequences,
// pullbacks) and a condition-by-condition verifier.

#include "dnclab/condition.hpp"
#include "dnclab/dnc.hpp"
#include "dnclab/flag.hpp"
#include "dnclab/catalog.hpp"

#include <array>
#include <functional>
#include <optional>
#include <sstream>

namespace dnclab {

using FrameFn = std::function<Matrix(const Vector&)>;
using Predicate = std::function<bool(const Vector&)>;

/// Global frames of ν(M_n, M_{n+1}) and ν(M_n, M) along M_n.
struct NormalityWitness {
  FrameFn next;
  FrameFn ambient;
};

/// Per-level tubular images V_n and smaller open sets U_n.
struct TubularCover {
  std::vector<Predicate> v;
  std::vector<Predicate> u;
  /// Whether the U_n are claimed to cover the ambient model at the given depth.
  bool claimed_complete = false;
};

/// f: ambient model -> truncated sequence space with M_n = f^{-1}(E_n).
struct FredholmData {
  SmoothMap map;
  Flag flag;
};

struct Filtration {
  std::string name;
  DimensionSequence delta;
  ImplicitManifold ambient;
  std::vector<ImplicitManifold> levels;
  /// One witness per level, or none.
  std::vector<NormalityWitness> normality;
  std::optional<TubularCover> cover;
  std::optional<FredholmData> fredholm;
  bool claimed_dense = false;
  bool claimed_normal = false;
  bool claimed_fredholm = false;
  /// Point of the level-n truncation of the ambient model nearest to x; the
  /// deepest truncation of a dense filtration lies in its deepest level.
  std::function<Vector(const Vector&, Index)> truncate;
  /// Distance from x to M_n; Gauss-Newton projection when absent.
  std::function<double(const Vector&, Index)> distance;

  Index depth() const { return static_cast<Index>(levels.size()); }
  /// 1-based.
  const ImplicitManifold& level(Index n) const { return levels.at(static_cast<std::size_t>(n - 1)); }
  bool has_witnesses() const { return static_cast<Index>(normality.size()) == depth() && depth() > 0; }
};

namespace detail {

inline Matrix flag_basis(const Flag& flag, Index n, Index d) {
  const Subspace& s = flag.level(n).span;
  if (s.cofinite()) throw DomainError("flag level " + std::to_string(n) + " is not finite-dimensional");
  return linalg::range_basis(s.generators(d));
}

inline Index model_dimension(const Flag& flag, Index margin) {
  return std::max(flag.delta(flag.depth()), flag.support_bound()) + margin;
}

/// span(B) ∩ domain inside R^d, cut out by the orthogonal complement of B.
inline ImplicitManifold linear_level(std::string name, const Matrix& b, Predicate domain = {}) {
  const Index d = b.rows();
  const Matrix ct = linalg::orthogonal_complement(b).transpose();
  ImplicitManifold m;
  m.name = std::move(name);
  m.ambient_dim = d;
  m.dim = b.cols();
  m.constraints = SmoothMap::linear(ct);
  m.domain = std::move(domain);
  m.sampler = [b](Rng& rng) { return Vector(b * rng.normal_vector(b.cols())); };
  return m;
}

/// Unit sphere of span(B) inside R^d.
inline ImplicitManifold sphere_level(std::string name, const Matrix& b) {
  const Index d = b.rows();
  const Matrix ct = linalg::orthogonal_complement(b).transpose();
  ImplicitManifold m;
  m.name = std::move(name);
  m.ambient_dim = d;
  m.dim = b.cols() - 1;
  m.constraints = {d, 1 + ct.rows(),
                   [ct](const Vector& x) {
                     Vector g(1 + ct.rows());
                     g << x.squaredNorm() - 1.0, ct * x;
                     return g;
                   },
                   [ct](const Vector& x) {
                     Matrix j(1 + ct.rows(), x.size());
                     j << 2.0 * x.transpose(), ct;
                     return j;
                   }};
  m.sampler = [b](Rng& rng) { return Vector((b * rng.normal_vector(b.cols())).normalized()); };
  return m;
}

inline double newton_distance(const ImplicitManifold& m, const Vector& x) {
  try {
    return (x - newton_project(m, x)).norm();
  } catch (const NoConvergence&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline Vector draw_on(const ImplicitManifold& m, Rng& rng, int attempts = 20) {
  for (int i = 0; i < attempts; ++i) {
    try {
      return m.sample(rng);
    } catch (const NoConvergence&) {
    }
  }
  throw NoConvergence("could not sample " + m.name);
}

/// Gauss-Legendre nodes on [-1/2, 1/2]; exact for polynomials of degree <= 7.
inline constexpr std::array<double, 4> gl_nodes{-0.4305681557970263, -0.1699905217924281, 0.1699905217924281,
                                                0.4305681557970263};
inline constexpr std::array<double, 4> gl_weights{0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                                  0.1739274225687269};

/// ∫ Dg(c + sλw) w ds over [-1/2, 1/2]: equals (g(c + λw/2) - g(c - λw/2))/λ
/// for polynomial g of degree <= 8 and Dg(c) w at λ = 0, without cancellation.
inline Vector divided_difference(const SmoothMap& g, const Vector& c, const Vector& w, double lambda) {
  Vector out = Vector::Zero(g.codomain_dim);
  for (std::size_t i = 0; i < gl_nodes.size(); ++i)
    out += gl_weights[i] * (differential(g, Vector(c + gl_nodes[i] * lambda * w)) * w);
  return out;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tangent bundles and tangent groupoids as embedded manifolds

/// TM ⊂ R^{2D}: pairs (x, v) with g(x) = 0 and Dg(x) v = 0.
inline ImplicitManifold tangent_bundle(const ImplicitManifold& m) {
  const Index d = m.ambient_dim;
  const SmoothMap g = m.constraints;
  const Index c = g.codomain_dim;
  ImplicitManifold t;
  t.name = "T" + m.name;
  t.ambient_dim = 2 * d;
  t.dim = 2 * m.dim;
  t.constraints = {2 * d, 2 * c,
                   [g, d](const Vector& z) {
                     const Vector x = z.head(d), v = z.tail(d);
                     return linalg::concat(g(x), Vector(differential(g, x) * v));
                   },
                   [g, d, c](const Vector& z) {
                     const Vector x = z.head(d), v = z.tail(d);
                     const Matrix dg = differential(g, x);
                     const SmoothMap dv{d, c, [g, v](const Vector& y) { return Vector(differential(g, y) * v); }, {}};
                     Matrix j = Matrix::Zero(2 * c, 2 * d);
                     j.topLeftCorner(c, d) = dg;
                     j.bottomLeftCorner(c, d) = jacobian(dv, x);
                     j.bottomRightCorner(c, d) = dg;
                     return j;
                   }};
  if (m.domain) t.domain = [m, d](const Vector& z) { return m.domain(z.head(d)); };
  t.sampler = [m](Rng& rng) {
    const Vector x = detail::draw_on(m, rng);
    const Matrix tx = tangent_space(m, x);
    return linalg::concat(x, Vector(tx * rng.normal_vector(tx.cols())));
  };
  return t;
}

/// Coordinates (c, w, λ) of the tangent groupoid inside R^{2D+1}: c = (a + b)/2, w = (a - b)/λ
/// for pairs (a, b, λ), and (m, v, 0) for tangent vectors.
inline Vector tg_coordinates(const TgElement& e) {
  const Index d = e.x.size();
  Vector z(2 * d + 1);
  if (e.is_pair())
    z << 0.5 * (e.x + e.y), (e.x - e.y) / e.lambda, e.lambda;
  else
    z << e.x, e.y, 0.0;
  return z;
}

inline TgElement tg_from_coordinates(const Vector& z) {
  const Index d = (z.size() - 1) / 2;
  const Vector c = z.head(d), w = z.segment(d, d);
  const double lambda = z[2 * d];
  if (lambda == 0.0) return TgElement::tangent(c, w);
  return TgElement::pair(Vector(c + 0.5 * lambda * w), Vector(c - 0.5 * lambda * w), lambda);
}

/// The tangent groupoid in R^{2D+1}: the λ != 0 slice is M x M, the λ = 0 slice is TM. The
/// constraints are the mean and the divided difference of g at the two
/// endpoints, exact for polynomial constraints of degree <= 8.
inline ImplicitManifold tangent_groupoid_space(const ImplicitManifold& m) {
  const Index d = m.ambient_dim;
  const SmoothMap g = m.constraints;
  const Index c = g.codomain_dim;
  ImplicitManifold t;
  t.name = "TG(" + m.name + ")";
  t.ambient_dim = 2 * d + 1;
  t.dim = 2 * m.dim + 1;
  t.constraints = {2 * d + 1, 2 * c,
                   [g, d](const Vector& z) {
                     const Vector cc = z.head(d), w = z.segment(d, d);
                     const double lam = z[2 * d];
                     const Vector s = 0.5 * (g(Vector(cc + 0.5 * lam * w)) + g(Vector(cc - 0.5 * lam * w)));
                     return linalg::concat(s, detail::divided_difference(g, cc, w, lam));
                   },
                   {}};
  if (m.domain)
    t.domain = [m, d](const Vector& z) {
      const Vector cc = z.head(d), w = z.segment(d, d);
      const double lam = z[2 * d];
      return m.domain(Vector(cc + 0.5 * lam * w)) && m.domain(Vector(cc - 0.5 * lam * w));
    };
  t.sampler = [m](Rng& rng) {
    const Vector x = detail::draw_on(m, rng);
    if (rng.uniform() < 0.5) {
      const Matrix tx = tangent_space(m, x);
      return tg_coordinates(TgElement::tangent(x, Vector(tx * rng.normal_vector(tx.cols()))));
    }
    const double lam = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 1.5);
    return tg_coordinates(TgElement::pair(x, detail::draw_on(m, rng), lam));
  };
  return t;
}

/// The induced map of tangent groupoids in the coordinates above.
inline SmoothMap tg_map_coordinates(const SmoothMap& f) {
  const Index d = f.domain_dim, e = f.codomain_dim;
  return {2 * d + 1, 2 * e + 1,
          [f, d](const Vector& z) {
            const Vector c = z.head(d), w = z.segment(d, d);
            const double lam = z[2 * d];
            Vector out(2 * f.codomain_dim + 1);
            out << 0.5 * (f(Vector(c + 0.5 * lam * w)) + f(Vector(c - 0.5 * lam * w))),
                detail::divided_difference(f, c, w, lam), lam;
            return out;
          },
          {}};
}

// ---------------------------------------------------------------------------
// Constructors

/// E_1 ⊂ E_2 ⊂ ... as linear submanifolds of R^D, D = dim E_depth + margin.
inline Filtration make_filtration_linear(const Flag& flag, Index margin = 5) {
  const Index d = detail::model_dimension(flag, margin);
  Filtration f;
  f.name = "linear";
  f.delta = flag.delta;
  f.ambient = catalog::euclidean(d);
  std::vector<Matrix> bases, projectors;
  for (Index n = 1; n <= flag.depth(); ++n) {
    bases.push_back(detail::flag_basis(flag, n, d));
    projectors.push_back(bases.back() * bases.back().transpose());
    f.levels.push_back(detail::linear_level("E_" + std::to_string(n), bases.back()));
  }
  TubularCover cover;
  for (Index n = 1; n <= flag.depth(); ++n) {
    const Matrix& b = bases[static_cast<std::size_t>(n - 1)];
    const Matrix next = n < flag.depth() ? linalg::relative_complement(bases[static_cast<std::size_t>(n)], b) : Matrix(d, 0);
    const Matrix amb = linalg::orthogonal_complement(b);
    f.normality.push_back({[next](const Vector&) { return next; }, [amb](const Vector&) { return amb; }});
    const Matrix p = projectors[static_cast<std::size_t>(n - 1)];
    const double radius = static_cast<double>(n);
    cover.v.push_back([](const Vector&) { return true; });
    cover.u.push_back([p, radius](const Vector& x) { return (x - p * x).norm() < radius; });
  }
  f.cover = cover;
  f.truncate = [projectors](const Vector& x, Index n) { return Vector(projectors.at(static_cast<std::size_t>(n - 1)) * x); };
  f.distance = [projectors](const Vector& x, Index n) {
    return (x - projectors.at(static_cast<std::size_t>(n - 1)) * x).norm();
  };
  f.fredholm = FredholmData{SmoothMap::identity(d), flag};
  f.claimed_dense = f.claimed_normal = f.claimed_fredholm = true;
  return f;
}

/// U ∩ E_n for an open U ⊂ R^D meeting E_1. The witness, when given, must be
/// a point of U ∩ E_1; otherwise one is searched for deterministically.
inline Filtration make_filtration_open_subset(Predicate u, const Flag& flag, std::optional<Vector> witness = std::nullopt,
                                              Index margin = 5) {
  const Index d = detail::model_dimension(flag, margin);
  const Matrix b1 = detail::flag_basis(flag, 1, d);
  if (witness) {
    const Vector w = linalg::resized(*witness, d);
    if (!u(w) || (w - b1 * (b1.transpose() * w)).norm() > 1e-12) throw EmptyFirstLevel("witness is not a point of U ∩ E_1");
    witness = w;
  } else {
    Rng rng = Rng::stream(0, "open-subset-witness");
    if (u(Vector::Zero(d))) witness = Vector::Zero(d);
    for (int i = 0; i < 400 && !witness; ++i) {
      const Vector w = b1 * rng.normal_vector(b1.cols()) * std::ldexp(4.0, -(i / 40));
      if (u(w)) witness = w;
    }
    if (!witness) throw EmptyFirstLevel("no point of U ∩ E_1 found");
  }
  Filtration f = make_filtration_linear(flag, margin);
  f.name = "open-subset";
  const Vector w = *witness;
  auto near_witness = [u, w](const Matrix& b) {
    return [u, w, b](Rng& rng) {
      double s = 1.0;
      for (int i = 0; i < 400; ++i) {
        if (i % 20 == 19) s *= 0.5;
        Vector x = w + s * rng.normal_vector(w.size());
        if (b.cols() < b.rows()) x = b * (b.transpose() * x);
        if (u(x)) return x;
      }
      return w;
    };
  };
  f.ambient.domain = u;
  f.ambient.sampler = near_witness(Matrix::Identity(d, d));
  for (Index n = 1; n <= f.depth(); ++n) {
    ImplicitManifold& m = f.levels[static_cast<std::size_t>(n - 1)];
    m.name = "U ∩ E_" + std::to_string(n);
    m.domain = u;
    m.sampler = near_witness(detail::flag_basis(flag, n, d));
    const Predicate un = f.cover->u[static_cast<std::size_t>(n - 1)];
    f.cover->u[static_cast<std::size_t>(n - 1)] = [u, un](const Vector& x) { return u(x) && un(x); };
    f.cover->v[static_cast<std::size_t>(n - 1)] = u;
  }
  const auto dist = f.distance;
  const auto trunc = f.truncate;
  f.distance = [u, dist, trunc](const Vector& x, Index n) {
    return u(trunc(x, n)) ? dist(x, n) : std::numeric_limits<double>::infinity();
  };
  return f;
}

/// S(E_n) inside S^{D-1}, a (Δ-1)-filtration.
inline Filtration make_filtration_sphere(const Flag& flag, Index margin = 5) {
  if (flag.delta(1) < 2)
    throw DimensionTooSmall("sphere filtration needs delta(1) >= 2, got " + std::to_string(flag.delta(1)));
  const Index d = detail::model_dimension(flag, margin);
  Filtration f;
  f.name = "sphere";
  std::vector<Index> dims;
  for (Index v : flag.delta.values()) dims.push_back(v - 1);
  f.delta = DimensionSequence(dims);
  f.ambient = catalog::sphere(d - 1, d);
  std::vector<Matrix> bases, projectors;
  for (Index n = 1; n <= flag.depth(); ++n) {
    bases.push_back(detail::flag_basis(flag, n, d));
    projectors.push_back(bases.back() * bases.back().transpose());
    f.levels.push_back(detail::sphere_level("S(E_" + std::to_string(n) + ")", bases.back()));
  }
  TubularCover cover;
  for (Index n = 1; n <= flag.depth(); ++n) {
    const Matrix& b = bases[static_cast<std::size_t>(n - 1)];
    const Matrix next = n < flag.depth() ? linalg::relative_complement(bases[static_cast<std::size_t>(n)], b) : Matrix(d, 0);
    const Matrix amb = linalg::orthogonal_complement(b);
    f.normality.push_back({[next](const Vector&) { return next; }, [amb](const Vector&) { return amb; }});
    const Matrix p = projectors[static_cast<std::size_t>(n - 1)];
    cover.v.push_back([p](const Vector& x) { return (p * x).norm() > 1e-9; });
    cover.u.push_back([p](const Vector& x) { return (p * x).norm() > 0.5; });
  }
  f.cover = cover;
  f.truncate = [projectors](const Vector& x, Index n) {
    const Vector y = projectors.at(static_cast<std::size_t>(n - 1)) * x;
    return y.norm() > 0.0 ? Vector(y.normalized()) : x;
  };
  f.distance = [projectors](const Vector& x, Index n) {
    const Vector y = projectors.at(static_cast<std::size_t>(n - 1)) * x;
    if (y.norm() == 0.0) return std::sqrt(2.0);
    return (x - y.normalized()).norm();
  };
  f.fredholm = FredholmData{SmoothMap::identity(d), flag};
  f.claimed_dense = f.claimed_normal = f.claimed_fredholm = true;
  return f;
}

/// RP^{δ(n)-1} ⊂ RP^{D-1} as rank-one projectors. Dense, but the normal
/// bundles are not trivial and no witnesses are supplied.
inline Filtration make_filtration_projective(const DimensionSequence& delta, Index margin = 5) {
  if (delta.depth() == 0 || delta(1) < 2)
    throw DimensionTooSmall("projective filtration needs delta(1) >= 2");
  const Index d = delta(delta.depth()) + margin;
  Filtration f;
  f.name = "projective";
  std::vector<Index> dims;
  for (Index v : delta.values()) dims.push_back(v - 1);
  f.delta = DimensionSequence(dims);
  f.ambient = catalog::projective(d - 1, d - 1);
  for (Index v : delta.values()) f.levels.push_back(catalog::projective(v - 1, d - 1));
  auto line = [d](const Vector& p) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(catalog::smat(p, d));
    return Vector(es.eigenvectors().col(d - 1));
  };
  f.truncate = [delta, d, line](const Vector& p, Index n) {
    Vector x = line(p);
    x.tail(d - delta(n)).setZero();
    if (x.norm() == 0.0) return p;
    x.normalize();
    return catalog::svec(Matrix(x * x.transpose()));
  };
  const auto trunc = f.truncate;
  f.distance = [trunc](const Vector& p, Index n) { return (p - trunc(p, n)).norm(); };
  f.claimed_dense = true;
  return f;
}

/// M_n x N_n with the product cover; claims hold when both factors claim them.
inline Filtration make_filtration_product(const Filtration& a, const Filtration& b) {
  if (a.depth() != b.depth())
    throw DepthMismatch("filtration depths " + std::to_string(a.depth()) + " and " + std::to_string(b.depth()));
  const Index da = a.ambient.ambient_dim, db = b.ambient.ambient_dim;
  Filtration f;
  f.name = a.name + " x " + b.name;
  std::vector<Index> dims;
  for (Index n = 1; n <= a.depth(); ++n) dims.push_back(a.delta(n) + b.delta(n));
  f.delta = DimensionSequence(dims);
  f.ambient = product(a.ambient, b.ambient);
  for (Index n = 1; n <= a.depth(); ++n) f.levels.push_back(product(a.level(n), b.level(n)));
  if (a.has_witnesses() && b.has_witnesses())
    for (Index n = 1; n <= a.depth(); ++n) {
      const NormalityWitness wa = a.normality[static_cast<std::size_t>(n - 1)];
      const NormalityWitness wb = b.normality[static_cast<std::size_t>(n - 1)];
      f.normality.push_back({[wa, wb, da, db](const Vector& z) {
                               return detail::block_diag(wa.next(z.head(da)), wb.next(z.tail(db)));
                             },
                             [wa, wb, da, db](const Vector& z) {
                               return detail::block_diag(wa.ambient(z.head(da)), wb.ambient(z.tail(db)));
                             }});
    }
  if (a.cover && b.cover) {
    TubularCover c;
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
      const Predicate va = a.cover->v[i], vb = b.cover->v[i], ua = a.cover->u[i], ub = b.cover->u[i];
      c.v.push_back([va, vb, da, db](const Vector& z) { return va(z.head(da)) && vb(z.tail(db)); });
      c.u.push_back([ua, ub, da, db](const Vector& z) { return ua(z.head(da)) && ub(z.tail(db)); });
    }
    c.claimed_complete = a.cover->claimed_complete && b.cover->claimed_complete;
    f.cover = c;
  }
  if (a.truncate && b.truncate) {
    const auto ta = a.truncate, tb = b.truncate;
    f.truncate = [ta, tb, da, db](const Vector& z, Index n) {
      return linalg::concat(ta(z.head(da), n), tb(z.tail(db), n));
    };
  }
  if (a.distance && b.distance) {
    const auto ra = a.distance, rb = b.distance;
    f.distance = [ra, rb, da, db](const Vector& z, Index n) { return std::hypot(ra(z.head(da), n), rb(z.tail(db), n)); };
  }
  if (a.fredholm && b.fredholm) {
    // Interleaved codomain with the rows neither factor reaches moved past
    // the occupied ones; a finite coordinate permutation, so the flag moves
    // with it exactly.
    const SmoothMap fa = a.fredholm->map, fb = b.fredholm->map;
    const Index ta = fa.codomain_dim, tb = fb.codomain_dim, t = std::max(ta, tb);
    std::vector<Index> order;
    for (Index i = 0; i < 2 * t; ++i)
      if (i % 2 == 0 ? i / 2 < ta : i / 2 < tb) order.push_back(i);
    const Index used = static_cast<Index>(order.size());
    for (Index i = 0; i < 2 * t; ++i)
      if (i % 2 == 0 ? i / 2 >= ta : i / 2 >= tb) order.push_back(i);
    Matrix perm = Matrix::Zero(2 * t, 2 * t);
    for (Index k = 0; k < 2 * t; ++k) perm(k, order[static_cast<std::size_t>(k)]) = 1.0;
    const SmoothMap prod{da + db, used,
                         [fa, fb, da, db, t, perm, used](const Vector& z) {
                           const Vector w = seq::interleave(linalg::resized(fa(z.head(da)), t),
                                                            linalg::resized(fb(z.tail(db)), t));
                           return Vector((perm * w).head(used));
                         },
                         {}};
    Flag flag = flag_product(a.fredholm->flag, b.fredholm->flag);
    if (used < 2 * t) {
      const SequenceOperator g = SequenceOperator::identity_plus(perm - Matrix::Identity(2 * t, 2 * t));
      for (ComplementedSubspace& c : flag.subspaces) c = image(g, c);
    }
    f.fredholm = FredholmData{prod, flag};
  }
  f.claimed_dense = a.claimed_dense && b.claimed_dense;
  f.claimed_normal = a.claimed_normal && b.claimed_normal;
  f.claimed_fredholm = a.claimed_fredholm && b.claimed_fredholm;
  return f;
}

/// M_n x M_n inside M x M, with f x f against the product flag.
inline Filtration pair_groupoid_filtration(const Filtration& f) {
  Filtration p = make_filtration_product(f, f);
  p.name = "pair groupoid of " + f.name;
  return p;
}

/// Whether a level of M x M is closed under (x, y) -> (y, x), as every
/// subgroupoid of the pair groupoid is; checked on samples.
inline bool swap_closed(const ImplicitManifold& level, Rng& rng, int samples = 16, double tol = 1e-8) {
  const Index d = level.ambient_dim / 2;
  for (int i = 0; i < samples; ++i) {
    const Vector z = detail::draw_on(level, rng);
    if (!level.contains(linalg::concat(z.tail(d), z.head(d)), tol)) return false;
  }
  return true;
}

namespace detail {

inline void require_witnesses(const Filtration& f, const std::string& what) {
  if (!f.has_witnesses()) throw MissingWitness(what + " needs normality witnesses for " + f.name);
}

/// Projects the given candidate vectors onto T_z M.
inline Matrix project_to_tangent(const ImplicitManifold& m, const Vector& z, const Matrix& candidates) {
  return tangent_projector(m, z) * candidates;
}

}  // namespace detail

/// TM_n inside TM ⊂ R^{2D}; dims 2δ(n). Frames are the tangent lifts
/// (W, 0), (0, W) of the given witnesses.
inline Filtration tangent_filtration(const Filtration& f) {
  detail::require_witnesses(f, "tangent filtration");
  const Index d = f.ambient.ambient_dim;
  Filtration t;
  t.name = "T(" + f.name + ")";
  std::vector<Index> dims;
  for (Index n = 1; n <= f.depth(); ++n) dims.push_back(2 * f.delta(n));
  t.delta = DimensionSequence(dims);
  t.ambient = tangent_bundle(f.ambient);
  for (const ImplicitManifold& m : f.levels) t.levels.push_back(tangent_bundle(m));
  for (Index n = 1; n <= f.depth(); ++n) {
    const NormalityWitness w = f.normality[static_cast<std::size_t>(n - 1)];
    const ImplicitManifold up = n < f.depth() ? t.levels[static_cast<std::size_t>(n)] : t.ambient;
    const ImplicitManifold amb = t.ambient;
    const bool top = n == f.depth();
    t.normality.push_back({[w, up, d, top](const Vector& z) {
                             const Matrix k = w.next(z.head(d));
                             if (top || k.cols() == 0) return Matrix(2 * d, 0);
                             return detail::project_to_tangent(up, z, detail::block_diag(k, k));
                           },
                           [w, amb, d](const Vector& z) {
                             const Matrix k = w.ambient(z.head(d));
                             return detail::project_to_tangent(amb, z, detail::block_diag(k, k));
                           }});
  }
  if (f.cover) {
    TubularCover c;
    for (std::size_t i = 0; i < f.levels.size(); ++i) {
      const Predicate v = f.cover->v[i], u = f.cover->u[i];
      c.v.push_back([v, d](const Vector& z) { return v(z.head(d)); });
      c.u.push_back([u, d](const Vector& z) { return u(z.head(d)); });
    }
    c.claimed_complete = f.cover->claimed_complete;
    t.cover = c;
  }
  if (f.fredholm) {
    const SmoothMap g = f.fredholm->map;
    const SmoothMap tg{2 * d, 2 * g.codomain_dim,
                       [g, d](const Vector& z) {
                         const Vector x = z.head(d), v = z.tail(d);
                         return seq::interleave(g(x), Vector(differential(g, x) * v));
                       },
                       {}};
    t.fredholm = FredholmData{tg, flag_product(f.fredholm->flag, f.fredholm->flag)};
  }
  t.claimed_normal = f.claimed_normal;
  t.claimed_fredholm = f.claimed_fredholm;
  return t;
}

/// Tangent groupoids of the M_n in R^{2D+1}; dims 2δ(n) + 1, Df against the groupoid flag.
inline Filtration tangent_groupoid_filtration(const Filtration& f) {
  detail::require_witnesses(f, "tangent groupoid filtration");
  const Index d = f.ambient.ambient_dim;
  Filtration t;
  t.name = "TG(" + f.name + ")";
  std::vector<Index> dims;
  for (Index n = 1; n <= f.depth(); ++n) dims.push_back(2 * f.delta(n) + 1);
  t.delta = DimensionSequence(dims);
  t.ambient = tangent_groupoid_space(f.ambient);
  for (const ImplicitManifold& m : f.levels) t.levels.push_back(tangent_groupoid_space(m));
  auto lift = [d](const Matrix& k) {
    Matrix out = Matrix::Zero(2 * d + 1, 2 * k.cols());
    out.block(0, 0, d, k.cols()) = k;
    out.block(d, k.cols(), d, k.cols()) = k;
    return out;
  };
  for (Index n = 1; n <= f.depth(); ++n) {
    const NormalityWitness w = f.normality[static_cast<std::size_t>(n - 1)];
    const ImplicitManifold up = n < f.depth() ? t.levels[static_cast<std::size_t>(n)] : t.ambient;
    const ImplicitManifold amb = t.ambient;
    const bool top = n == f.depth();
    t.normality.push_back({[w, up, d, top, lift](const Vector& z) {
                             const Matrix k = w.next(z.head(d));
                             if (top || k.cols() == 0) return Matrix(2 * d + 1, 0);
                             return detail::project_to_tangent(up, z, lift(k));
                           },
                           [w, amb, d, lift](const Vector& z) {
                             return detail::project_to_tangent(amb, z, lift(w.ambient(z.head(d))));
                           }});
  }
  if (f.cover) {
    TubularCover c;
    for (std::size_t i = 0; i < f.levels.size(); ++i) {
      const Predicate v = f.cover->v[i], u = f.cover->u[i];
      auto both = [d](Predicate p) {
        return [p, d](const Vector& z) {
          const Vector cc = z.head(d), w = z.segment(d, d);
          const double lam = z[2 * d];
          return p(Vector(cc + 0.5 * lam * w)) && p(Vector(cc - 0.5 * lam * w));
        };
      };
      c.v.push_back(both(v));
      c.u.push_back(both(u));
    }
    c.claimed_complete = f.cover->claimed_complete;
    t.cover = c;
  }
  if (f.fredholm) {
    const SmoothMap g = tg_map_coordinates(f.fredholm->map);
    const Index e = f.fredholm->map.codomain_dim;
    const SmoothMap placed{2 * d + 1, 2 * e + 1,
                           [g, e](const Vector& z) {
                             const Vector y = g(z);
                             Vector out(2 * e + 1);
                             out << y[2 * e], seq::interleave(y.head(e), y.segment(e, e));
                             return out;
                           },
                           {}};
    t.fredholm = FredholmData{placed, flag_groupoid(f.fredholm->flag)};
  }
  t.claimed_normal = f.claimed_normal;
  t.claimed_fredholm = f.claimed_fredholm;
  return t;
}

/// Levels n_1 < n_2 < ... (1-based); normal frames of consecutive original
/// levels are stacked.
inline Filtration subsequence_filtration(const Filtration& f, const std::vector<Index>& indices) {
  if (indices.empty()) throw IndexError("subsequence needs at least one index");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index n = indices[i];
    if (n < 1 || n > f.depth()) throw IndexError("index " + std::to_string(n) + " outside 1.." + std::to_string(f.depth()));
    if (i > 0 && n <= indices[i - 1]) throw IndexError("indices must be strictly increasing");
  }
  Filtration s;
  s.name = f.name;
  if (indices.size() != static_cast<std::size_t>(f.depth())) {
    s.name += " at (";
    for (std::size_t i = 0; i < indices.size(); ++i) s.name += (i ? "," : "") + std::to_string(indices[i]);
    s.name += ")";
  }
  std::vector<Index> dims;
  for (Index n : indices) {
    dims.push_back(f.delta(n));
    s.levels.push_back(f.level(n));
  }
  s.delta = DimensionSequence(dims);
  s.ambient = f.ambient;
  if (f.has_witnesses())
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const Index from = indices[i];
      const Index to = i + 1 < indices.size() ? indices[i + 1] : from;
      std::vector<FrameFn> parts;
      for (Index k = from; k < to; ++k) parts.push_back(f.normality[static_cast<std::size_t>(k - 1)].next);
      const Index dim = f.ambient.ambient_dim;
      s.normality.push_back({[parts, dim](const Vector& x) {
                               Matrix out(dim, 0);
                               for (const FrameFn& p : parts) out = linalg::hcat(out, p(x));
                               return out;
                             },
                             f.normality[static_cast<std::size_t>(from - 1)].ambient});
    }
  if (f.cover) {
    TubularCover c;
    for (Index n : indices) {
      c.v.push_back(f.cover->v[static_cast<std::size_t>(n - 1)]);
      c.u.push_back(f.cover->u[static_cast<std::size_t>(n - 1)]);
    }
    c.claimed_complete = f.cover->claimed_complete;
    s.cover = c;
  }
  auto reindex = indices;
  if (f.truncate) {
    const auto t = f.truncate;
    s.truncate = [t, reindex](const Vector& x, Index n) { return t(x, reindex.at(static_cast<std::size_t>(n - 1))); };
  }
  if (f.distance) {
    const auto r = f.distance;
    s.distance = [r, reindex](const Vector& x, Index n) { return r(x, reindex.at(static_cast<std::size_t>(n - 1))); };
  }
  if (f.fredholm) s.fredholm = FredholmData{f.fredholm->map, flag_subsequence(f.fredholm->flag, indices)};
  s.claimed_dense = f.claimed_dense;
  s.claimed_normal = f.claimed_normal;
  s.claimed_fredholm = f.claimed_fredholm;
  return s;
}

/// M_n x {0} inside M x R^k: normal, not dense, not Fredholm.
inline Filtration make_filtration_with_trivial_factor(const Filtration& f, Index k) {
  const Index d = f.ambient.ambient_dim;
  Filtration t;
  t.name = f.name + " x {0} in R^" + std::to_string(k);
  t.delta = f.delta;
  t.ambient = product(f.ambient, catalog::euclidean(k));
  const ImplicitManifold origin = catalog::coordinate_subspace(k, {});
  for (const ImplicitManifold& m : f.levels) t.levels.push_back(product(m, origin));
  if (f.has_witnesses())
    for (const NormalityWitness& w : f.normality)
      t.normality.push_back({[w, d, k](const Vector& z) { return detail::block_diag(w.next(z.head(d)), Matrix(k, 0)); },
                             [w, d, k](const Vector& z) {
                               return detail::block_diag(w.ambient(z.head(d)), Matrix(Matrix::Identity(k, k)));
                             }});
  if (f.truncate) {
    const auto tr = f.truncate;
    t.truncate = [tr, d, k](const Vector& z, Index n) { return linalg::concat(tr(z.head(d), n), z.tail(k)); };
  }
  if (f.distance) {
    const auto r = f.distance;
    t.distance = [r, d, k](const Vector& z, Index n) { return std::hypot(r(z.head(d), n), z.tail(k).norm()); };
  }
  t.claimed_normal = f.claimed_normal;
  return t;
}

// ---------------------------------------------------------------------------
// Pullbacks

/// p^{-1}(M_n) for a covering p: N -> M. `lift` returns every preimage of a
/// point of M. Throws NotCovering when p is not a local diffeomorphism at a
/// sample, the lifts do not map back, or the number of sheets varies.
inline Filtration pullback_filtration_covering(const ImplicitManifold& cover_space, const SmoothMap& p,
                                               const std::function<std::vector<Vector>(const Vector&)>& lift,
                                               const Filtration& f, int samples = 16, std::uint64_t seed = 42) {
  if (cover_space.dim != f.ambient.dim)
    throw NotCovering("covering space has dimension " + std::to_string(cover_space.dim) + ", base " +
                      std::to_string(f.ambient.dim));
  Rng rng = Rng::stream(seed, "covering-check");
  std::optional<std::size_t> sheets;
  auto check = [&](const Vector& y) {
    const std::vector<Vector> xs = lift(y);
    if (!sheets) sheets = xs.size();
    if (xs.empty() || xs.size() != *sheets)
      throw NotCovering("fiber over a sample has " + std::to_string(xs.size()) + " points, expected " +
                        std::to_string(*sheets));
    for (const Vector& x : xs) {
      if (!cover_space.contains(x) || (p(x) - y).norm() > 1e-8) throw NotCovering("lift does not map back to the sample");
      const Matrix img = differential(p, x) * tangent_space(cover_space, x);
      if (linalg::rank(img) != cover_space.dim) throw NotCovering("differential is not injective at a lift");
    }
  };
  for (int i = 0; i < samples; ++i) check(detail::draw_on(f.ambient, rng));
  for (const ImplicitManifold& m : f.levels)
    for (int i = 0; i < samples / 2 + 1; ++i) check(detail::draw_on(m, rng));

  Filtration out;
  out.name = "covering pullback of " + f.name;
  out.delta = f.delta;
  out.ambient = cover_space;
  const ImplicitManifold base_ambient = f.ambient;
  out.ambient.sampler = [lift, base_ambient](Rng& r) {
    const std::vector<Vector> xs = lift(detail::draw_on(base_ambient, r));
    return xs[static_cast<std::size_t>(r.integer(0, static_cast<int>(xs.size()) - 1))];
  };
  for (const ImplicitManifold& m : f.levels) {
    ImplicitManifold l = preimage(p, cover_space, f.ambient, m);
    l.name = "p^-1(" + m.name + ")";
    l.sampler = [lift, m](Rng& r) {
      const std::vector<Vector> xs = lift(detail::draw_on(m, r));
      return xs[static_cast<std::size_t>(r.integer(0, static_cast<int>(xs.size()) - 1))];
    };
    out.levels.push_back(l);
  }
  if (f.has_witnesses())
    for (const NormalityWitness& w : f.normality) {
      auto pull = [p, cover_space](const FrameFn& frame) {
        return [p, cover_space, frame](const Vector& x) {
          const Matrix t = tangent_space(cover_space, x);
          const Matrix k = frame(p(x));
          const Matrix a = differential(p, x) * t;
          Matrix out(x.size(), k.cols());
          for (Index j = 0; j < k.cols(); ++j) out.col(j) = t * linalg::min_norm_solve(a, k.col(j));
          return out;
        };
      };
      out.normality.push_back({pull(w.next), pull(w.ambient)});
    }
  if (f.cover) {
    TubularCover c;
    for (std::size_t i = 0; i < f.levels.size(); ++i) {
      const Predicate v = f.cover->v[i], u = f.cover->u[i];
      c.v.push_back([v, p](const Vector& x) { return v(p(x)); });
      c.u.push_back([u, p](const Vector& x) { return u(p(x)); });
    }
    c.claimed_complete = f.cover->claimed_complete;
    out.cover = c;
  }
  if (f.truncate) {
    const auto t = f.truncate;
    out.truncate = [t, p, lift](const Vector& x, Index n) {
      const std::vector<Vector> xs = lift(t(p(x), n));
      Vector best = xs.front();
      for (const Vector& c : xs)
        if ((c - x).norm() < (best - x).norm()) best = c;
      return best;
    };
  }
  if (f.fredholm) out.fredholm = FredholmData{compose(f.fredholm->map, p), f.fredholm->flag};
  out.claimed_dense = f.claimed_dense;
  out.claimed_normal = f.claimed_normal;
  out.claimed_fredholm = f.claimed_fredholm;
  return out;
}

/// N_n = g^{-1}(M_n) for g: N -> M transverse to every level, a
/// (Δ + p)-filtration with p = dim N - dim M. Transversality and the
/// dimension of each N_n are checked at projected samples.
inline Filtration pullback_filtration_fredholm(const ImplicitManifold& source, const SmoothMap& g, const Filtration& f,
                                               int samples = 8, std::uint64_t seed = 42) {
  const Index p = source.dim - f.ambient.dim;
  Filtration out;
  out.name = "pullback of " + f.name;
  out.ambient = source;
  std::vector<Index> dims;
  Rng rng = Rng::stream(seed, "fredholm-pullback");
  for (Index n = 1; n <= f.depth(); ++n) {
    const ImplicitManifold& m = f.level(n);
    if (p + m.dim < 1) throw DomainError("pulled-back level would be empty-dimensional");
    ImplicitManifold l = preimage(g, source, f.ambient, m);
    l.name = "g^-1(" + m.name + ")";
    l.sampler = [l, source](Rng& r) {
      for (int i = 0; i < 40; ++i) {
        try {
          return newton_project(l, detail::draw_on(source, r), {.tol = 1e-13});
        } catch (const NoConvergence&) {
        }
      }
      throw NoConvergence("no point of " + l.name + " found from samples of " + source.name);
    };
    for (int i = 0; i < samples; ++i) {
      const Vector x = l.sample(rng);
      const Vector y = g(x);
      const Matrix img = differential(g, x) * tangent_space(source, x);
      const Matrix s = linalg::hcat(img, tangent_space(m, y));
      if (linalg::rank(s) != f.ambient.dim)
        throw NotTransverse("g is not transverse to " + m.name + " at " + detail::point_text(x));
      const Index measured = l.ambient_dim - linalg::rank(l.constraint_jacobian(x));
      if (measured != p + m.dim)
        throw NotTransverse(l.name + " has dimension " + std::to_string(measured) + " at a sample, expected " +
                            std::to_string(p + m.dim));
    }
    dims.push_back(p + f.delta(n));
    out.levels.push_back(l);
  }
  out.delta = DimensionSequence(dims);
  if (f.has_witnesses())
    for (const NormalityWitness& w : f.normality) {
      auto pull = [g, source](const FrameFn& frame) {
        return [g, source, frame](const Vector& x) {
          const Matrix t = tangent_space(source, x);
          const Matrix k = frame(g(x));
          const Matrix a = differential(g, x) * t;
          Matrix out(x.size(), k.cols());
          for (Index j = 0; j < k.cols(); ++j) out.col(j) = t * linalg::min_norm_solve(a, k.col(j));
          return out;
        };
      };
      out.normality.push_back({pull(w.next), pull(w.ambient)});
    }
  if (f.cover) {
    TubularCover c;
    for (std::size_t i = 0; i < f.levels.size(); ++i) {
      const Predicate v = f.cover->v[i], u = f.cover->u[i];
      c.v.push_back([v, g](const Vector& x) { return v(g(x)); });
      c.u.push_back([u, g](const Vector& x) { return u(g(x)); });
    }
    out.cover = c;
  }
  if (f.fredholm) out.fredholm = FredholmData{compose(f.fredholm->map, g), f.fredholm->flag};
  out.claimed_normal = f.claimed_normal;
  out.claimed_fredholm = f.claimed_fredholm;
  return out;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyOptions {
  /// 0 verifies every level.
  Index depth = 0;
  int samples = 64;
  std::uint64_t seed = 42;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

inline double level_distance(const Filtration& f, const Vector& x, Index n) {
  if (f.distance) return f.distance(x, n);
  return newton_distance(f.level(n), x);
}

inline bool tangent_to(const Matrix& tangent, const Matrix& vectors, double tol = 1e-7) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    const Vector v = vectors.col(j);
    if ((v - tangent * (tangent.transpose() * v)).norm() > tol * std::max(1.0, v.norm())) return false;
  }
  return true;
}

}  // namespace detail

/// Conditions a (dimensions, exact and by Jacobian rank), b (nesting), c
/// (out of scope), d (normality witnesses), e (tubular cover), density and
/// fredholm (transversality and preimage membership), each with evidence.
inline ConditionReport verify_filtration(const Filtration& f, const VerifyOptions& opts = {}) {
  const Index depth = opts.depth > 0 ? std::min(opts.depth, f.depth()) : f.depth();
  ConditionReport rep;
  std::vector<std::vector<Vector>> samples(static_cast<std::size_t>(depth));
  for (Index n = 1; n <= depth; ++n) {
    Rng rng = Rng::stream(opts.seed, f.name + "/level", static_cast<std::uint64_t>(n));
    for (int i = 0; i < opts.samples; ++i) samples[static_cast<std::size_t>(n - 1)].push_back(detail::draw_on(f.level(n), rng));
  }
  Rng arng = Rng::stream(opts.seed, f.name + "/ambient");
  std::vector<Vector> ambient;
  for (int i = 0; i < opts.samples; ++i) ambient.push_back(detail::draw_on(f.ambient, arng));
  auto level_samples = [&](Index n) -> const std::vector<Vector>& { return samples[static_cast<std::size_t>(n - 1)]; };

  {
    ConditionResult c{"a", Status::pass, "", true};
    std::ostringstream ev;
    ev << "dims";
    for (Index n = 1; n <= depth; ++n) {
      const ImplicitManifold& m = f.level(n);
      Index lo = m.ambient_dim, hi = 0;
      for (const Vector& x : level_samples(n)) {
        const Index r = m.ambient_dim - linalg::rank(m.constraint_jacobian(x));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      ev << " " << m.dim;
      if (lo != hi) ev << "[rank " << lo << ".." << hi << "]";
      if (m.dim != f.delta(n) || lo != m.dim || hi != m.dim) {
        c.status = Status::fail;
        ev << "(delta " << f.delta(n) << ", rank " << lo << ")";
      }
    }
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }

  {
    ConditionResult c{"b", Status::pass, "", true};
    double worst = 0.0;
    for (Index n = 1; n < depth; ++n)
      for (const Vector& x : level_samples(n)) worst = std::max(worst, f.level(n + 1).residual(x));
    for (const Vector& x : level_samples(depth)) worst = std::max(worst, f.ambient.residual(x));
    if (!(worst <= 1e-8)) c.status = Status::fail;
    c.evidence = "max residual of M_n samples on M_{n+1} " + detail::fmt(worst);
    rep.conditions.push_back(c);
  }

  rep.conditions.push_back({"c", Status::out_of_scope, "homotopy equivalence of the union is not computed", true});

  {
    ConditionResult c{"d", Status::pass, "", f.claimed_normal};
    if (!f.has_witnesses()) {
      c.status = Status::unverified;
      c.evidence = "no witness supplied: normality unverified";
    } else {
      std::ostringstream ev;
      int checked = 0;
      for (Index n = 1; n <= depth; ++n) {
        const NormalityWitness& w = f.normality[static_cast<std::size_t>(n - 1)];
        const ImplicitManifold& m = f.level(n);
        const bool has_next = n < f.depth();
        for (const Vector& x : level_samples(n)) {
          if (!f.ambient.contains(x) || (has_next && !f.level(n + 1).contains(x))) {
            c.status = Status::fail;
            ev << "level " << n << " is not nested; ";
            break;
          }
          const Matrix tm = tangent_space(m, x);
          const Matrix ta = tangent_space(f.ambient, x);
          const Matrix wa = w.ambient(x);
          bool ok = wa.cols() == f.ambient.dim - m.dim && detail::tangent_to(ta, wa) &&
                    linalg::rank(linalg::hcat(tm, wa)) == f.ambient.dim;
          if (has_next) {
            const ImplicitManifold& up = f.level(n + 1);
            const Matrix tu = tangent_space(up, x);
            const Matrix wn = w.next(x);
            ok = ok && wn.cols() == up.dim - m.dim && detail::tangent_to(tu, wn) &&
                 linalg::rank(linalg::hcat(tm, wn)) == up.dim;
          }
          ++checked;
          if (!ok) {
            c.status = Status::fail;
            ev << "frame of level " << n << " fails the rank test; ";
            break;
          }
        }
      }
      if (c.status == Status::pass) ev << "witness frames independent and normal at " << checked << " samples";
      c.evidence = ev.str();
    }
    rep.conditions.push_back(c);
  }

  {
    ConditionResult c{"e", Status::pass, "", f.claimed_normal};
    if (!f.cover) {
      c.status = Status::unverified;
      c.evidence = "no cover supplied";
    } else {
      const TubularCover& cv = *f.cover;
      std::ostringstream ev;
      int bad = 0, covered = 0;
      auto u = [&](Index n, const Vector& x) { return cv.u[static_cast<std::size_t>(n - 1)](x); };
      auto v = [&](Index n, const Vector& x) { return cv.v[static_cast<std::size_t>(n - 1)](x); };
      std::vector<Vector> pts = ambient;
      for (Index n = 1; n <= depth; ++n) {
        for (const Vector& x : level_samples(n))
          if (!u(n, x)) ++bad;
        pts.insert(pts.end(), level_samples(n).begin(), level_samples(n).end());
      }
      for (const Vector& x : pts)
        for (Index n = 1; n <= depth; ++n) {
          if (u(n, x) && !v(n, x)) ++bad;
          if (n < depth && u(n, x) && !u(n + 1, x)) ++bad;
        }
      for (const Vector& x : ambient)
        for (Index n = 1; n <= depth; ++n)
          if (u(n, x)) {
            ++covered;
            break;
          }
      const double frac = ambient.empty() ? 1.0 : static_cast<double>(covered) / static_cast<double>(ambient.size());
      if (bad > 0) {
        c.status = Status::fail;
        ev << bad << " containment violations; ";
      }
      if (frac < 1.0 && cv.claimed_complete) c.status = Status::fail;
      ev << "coverage " << detail::fmt(frac) << " at depth " << depth;
      if (frac < 1.0 && !cv.claimed_complete) ev << " (partial, completeness not claimed)";
      c.evidence = ev.str();
    }
    rep.conditions.push_back(c);
  }

  {
    ConditionResult c{"density", Status::pass, "", f.claimed_dense};
    std::ostringstream ev;
    int increasing = 0;
    std::vector<double> mean(static_cast<std::size_t>(depth), 0.0);
    for (const Vector& x : ambient) {
      double prev = std::numeric_limits<double>::infinity();
      for (Index n = 1; n <= depth; ++n) {
        const double dn = detail::level_distance(f, x, n);
        mean[static_cast<std::size_t>(n - 1)] += dn / static_cast<double>(ambient.size());
        if (dn > prev + 1e-9) ++increasing;
        prev = dn;
      }
    }
    ev << "mean distance profile";
    for (double m : mean) ev << " " << detail::fmt(m);
    if (increasing > 0) {
      c.status = Status::fail;
      ev << "; " << increasing << " increases";
    }
    if (f.truncate) {
      double worst = 0.0;
      for (const Vector& x : ambient) worst = std::max(worst, detail::level_distance(f, f.truncate(x, depth), depth));
      ev << "; truncated samples at distance <= " << detail::fmt(worst) << " from M_" << depth;
      if (!(worst <= 1e-7)) c.status = Status::fail;
    } else {
      ev << "; no truncation supplied, profile only";
      if (f.claimed_dense) c.status = Status::unverified;
    }
    if (!f.claimed_dense) ev << " (not claimed)";
    c.evidence = ev.str();
    rep.conditions.push_back(c);
  }

  {
    ConditionResult c{"fredholm", Status::pass, "", f.claimed_fredholm};
    if (!f.fredholm) {
      c.status = Status::unverified;
      c.evidence = f.claimed_fredholm ? "no Fredholm data supplied" : "not claimed";
    } else {
      const FredholmData& fd = *f.fredholm;
      const Index t = fd.map.codomain_dim;
      std::ostringstream ev;
      double off = 0.0, preimage_gap = 0.0;
      int nontransverse = 0, projected = 0;
      for (Index n = 1; n <= depth; ++n) {
        const Matrix b = linalg::range_basis(fd.flag.level(n).span.generators(t));
        const Matrix q = linalg::orthogonal_complement(b);
        for (const Vector& x : level_samples(n)) {
          off = std::max(off, (q.transpose() * fd.map(x)).norm());
          const Matrix img = differential(fd.map, x) * tangent_space(f.ambient, x);
          if (linalg::rank(linalg::hcat(img, b)) != t) ++nontransverse;
        }
        ImplicitManifold pre;
        pre.name = "f^-1(E_" + std::to_string(n) + ")";
        pre.ambient_dim = f.ambient.ambient_dim;
        pre.dim = f.level(n).dim;
        const SmoothMap ga = f.ambient.constraints, map = fd.map;
        const Matrix qt = q.transpose();
        pre.constraints = {pre.ambient_dim, ga.codomain_dim + qt.rows(),
                           [ga, map, qt](const Vector& x) { return linalg::concat(ga(x), Vector(qt * map(x))); },
                           [ga, map, qt](const Vector& x) {
                             return linalg::vcat(differential(ga, x), Matrix(qt * differential(map, x)));
                           }};
        pre.domain = f.ambient.domain;
        for (std::size_t i = 0; i < ambient.size(); i += 4) {
          try {
            const Vector y = newton_project(pre, ambient[i], {.tol = 1e-12});
            preimage_gap = std::max(preimage_gap, f.level(n).residual(y));
            ++projected;
          } catch (const NoConvergence&) {
          }
        }
      }
      ev << "max distance of f(M_n) from E_n " << detail::fmt(off) << ", " << nontransverse
         << " non-transverse samples, " << projected << " points of f^-1(E_n) with max residual "
         << detail::fmt(preimage_gap) << " on M_n";
      if (!(off <= 1e-7) || nontransverse > 0 || !(preimage_gap <= 1e-7) || projected == 0) c.status = Status::fail;
      c.evidence = ev.str();
    }
    rep.conditions.push_back(c);
  }
  return rep;
}

}  // namespace dnclab
