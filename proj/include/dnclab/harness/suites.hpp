#pragma once

// The built-in verification suites. Each binds one result to randomized and
// fixed instances; counts scale with SuiteConfig::samples.

#include "dnclab/filtration.hpp"
#include "dnclab/fixtures.hpp"
#include "dnclab/harness/suite.hpp"
#include "dnclab/transversality.hpp"

namespace dnclab::harness {

namespace gen {

inline SequenceOperator random_glk(Rng& rng, Index n) {
  for (;;) {
    const Matrix k = rng.integer_matrix(n, n, -2, 2);
    if (linalg::inverse_condition(Matrix(Matrix::Identity(n, n) + k)) >= 1e-3) return SequenceOperator::identity_plus(k);
  }
}

inline SequenceOperator random_factor(Rng& rng) {
  return SequenceOperator::shift_plus(rng.integer(-2, 2), rng.integer_matrix(4, 4, -1, 1));
}

/// A coordinate subspace, or one skewed by a unipotent operator.
inline ComplementedSubspace random_target(Rng& rng) {
  const Index n = rng.integer(1, 5);
  if (rng.integer(0, 1) == 0) return ComplementedSubspace::coordinate(n);
  Matrix u = Matrix::Zero(n + 3, n + 3);
  for (Index i = 0; i < n + 3; ++i)
    for (Index j = i + 1; j < n + 3; ++j) u(i, j) = rng.integer(-1, 1);
  return image(SequenceOperator::identity_plus(u), ComplementedSubspace::coordinate(n));
}

inline Json subspace_json(const ComplementedSubspace& v, Index level) { return to_json(v.span.generators(level)); }

inline DncPoint random_dnc_point(const ManifoldPair& pair, Rng& rng, bool boundary) {
  if (!boundary)
    return DncPoint::interior(pair.big.sample(rng), rng.uniform(0.1, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0));
  const Vector m = pair.small.sample(rng);
  const Matrix n = normal_frame(pair, m);
  return DncPoint::boundary(m, Vector(0.5 * (n * rng.normal_vector(n.cols()))));
}

/// Powers of two 2, 4, ..., 2^depth.
inline DimensionSequence doubling(Index depth) {
  std::vector<Index> d;
  for (Index n = 1; n <= depth; ++n) d.push_back(Index{1} << n);
  return DimensionSequence(d);
}

inline std::vector<Index> dims(const Filtration& f) {
  std::vector<Index> out;
  for (const ImplicitManifold& m : f.levels) out.push_back(m.dim);
  return out;
}

/// Codimension of the constraint Jacobian at samples equals the declared
/// dimension on every level.
inline bool rank_dims_match(const Filtration& f, Rng& rng, int samples, std::vector<Index>& measured) {
  measured.clear();
  bool ok = true;
  for (const ImplicitManifold& m : f.levels) {
    Index got = -1;
    for (int i = 0; i < samples; ++i) {
      const Vector x = m.sample(rng);
      const Index r = m.ambient_dim - linalg::rank(m.constraint_jacobian(x));
      if (got >= 0 && r != got) ok = false;
      got = r;
    }
    measured.push_back(got);
    ok = ok && got == m.dim;
  }
  return ok;
}

inline void expect_report(Check& c, const std::string& label, const ConditionReport& r,
                          const std::vector<std::string>& must_pass = {"a", "b"}) {
  for (const std::string& cond : must_pass)
    c.require(r.status_of(cond) == Status::pass,
              label + ": condition " + cond + " is " + std::string(to_string(r.status_of(cond))) + " (" +
                  (r.find(cond) ? r.find(cond)->evidence : std::string("missing")) + ")");
  c.require(r.passed(), label + ": a claimed condition failed", to_json(r));
}

inline Filtration sphere_tower(Index depth, Index truncation) {
  const DimensionSequence d = doubling(depth);
  const Index top = d(depth);
  return make_filtration_sphere(standard_flag(d), std::max<Index>(1, truncation - top));
}

}  // namespace gen

inline void suite_block_index_zero(SuiteContext& ctx) {
  const int n = 3 * ctx.config.samples;
  ctx.check("flattened-index-zero", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const SequenceOperator f = gen::random_glk(c.rng, c.rng.integer(1, 4));
      const SequenceOperator f2 = gen::random_glk(c.rng, c.rng.integer(1, 4));
      const FiniteRankOperator p(c.rng.integer_matrix(c.rng.integer(1, 5), c.rng.integer(1, 5), -3, 3));
      const long idx = fredholm_index(BlockOperator(f, p, f2).flatten());
      c.bound("max_abs_index", static_cast<double>(std::labs(idx)), 0.0,
              Json{{"trial", i}, {"F", to_json(f)}, {"F2", to_json(f2)}, {"P", to_json(p.entries())}});
    }
    c.record("instances", n);
  });
  ctx.check("index-additivity", [n](Check& c) {
    long mismatches = 0;
    for (int i = 0; i < n; ++i) {
      const SequenceOperator f = SequenceOperator::shift_plus(c.rng.integer(-3, 3), c.rng.integer_matrix(3, 3, -1, 1));
      const SequenceOperator f2 = SequenceOperator::shift_plus(c.rng.integer(-3, 3), c.rng.integer_matrix(3, 3, -1, 1));
      const BlockOperator b(f, FiniteRankOperator(c.rng.integer_matrix(4, 4, -2, 2)), f2);
      const long lhs = fredholm_index(b.flatten()), rhs = fredholm_index(f) + fredholm_index(f2);
      if (lhs != rhs) ++mismatches;
      c.require(lhs == rhs, "index of the flattened block differs from the sum of factor indices",
                Json{{"trial", i}, {"F", to_json(f)}, {"F2", to_json(f2)}, {"flattened", lhs}, {"sum", rhs}});
    }
    c.record("mismatches", mismatches);
    c.record("instances", n);
  });
  ctx.check("lower-triangular-action", [n](Check& c) {
    for (int i = 0; i < n / 4 + 1; ++i) {
      const SequenceOperator f = SequenceOperator::shift_plus(c.rng.integer(-2, 2), c.rng.integer_matrix(3, 3, -2, 2));
      const SequenceOperator f2 = SequenceOperator::shift_plus(c.rng.integer(-2, 2), c.rng.integer_matrix(3, 3, -2, 2));
      const FiniteRankOperator p(c.rng.integer_matrix(4, 3, -2, 2));
      const BlockOperator b(f, p, f2);
      const Vector x1 = c.rng.dyadic_vector(6), x2 = c.rng.dyadic_vector(6);
      const auto [y1, y2] = b.apply(x1, x2);
      const auto [z1, z2] = seq::deinterleave(b.flatten().apply(seq::interleave(x1, x2)));
      const Index len = std::max({y1.size(), y2.size(), z1.size(), z2.size()});
      const double r = std::max(linalg::max_abs(Vector(linalg::resized(z1, len) - linalg::resized(y1, len))),
                                linalg::max_abs(Vector(linalg::resized(z2, len) - linalg::resized(y2, len))));
      c.bound("flatten_vs_blocks", r, 0.0, Json{{"trial", i}});
    }
  });
}

inline void suite_retraction(SuiteContext& ctx) {
  const int n = ctx.config.samples + ctx.config.samples / 2;
  ctx.check("path-stays-invertible", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const Index k = c.rng.integer(1, 3);
      const BlockOperator b(gen::random_glk(c.rng, k), FiniteRankOperator(c.rng.integer_matrix(k, k, -3, 3)),
                            gen::random_glk(c.rng, k));
      if (!c.require(is_glk_tilde(b), "random instance is not in GL~_K", Json{{"trial", i}})) return;
      for (int s = 0; s <= 100; ++s)
        c.at_least("min_inverse_condition", window_inverse_condition(retraction_path(b, s / 100.0)), 1e-8,
                   Json{{"trial", i}, {"t", s / 100.0}, {"F", to_json(b.f())}, {"P", to_json(b.p().entries())}});
    }
    c.record("instances", n);
    c.record("grid_points", 101);
  });
  ctx.check("endpoints", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const Index k = c.rng.integer(1, 3);
      const BlockOperator b(gen::random_glk(c.rng, k), FiniteRankOperator(c.rng.integer_matrix(k, k, -3, 3)),
                            gen::random_glk(c.rng, k));
      c.require(retraction_path(b, 0.0).flatten() == b.flatten(), "path does not start at B", Json{{"trial", i}});
      const BlockOperator end = retraction_path(b, 1.0);
      c.require(linalg::max_abs(end.p().entries()) == 0.0 && end.f() == b.f() && end.f2() == b.f2(),
                "path does not end at the block diagonal", Json{{"trial", i}});
    }
  });
}

inline void suite_block_transversality(SuiteContext& ctx) {
  const int n = 3 * ctx.config.samples;
  const Index level = ctx.config.truncation;
  ctx.check("factor-transversality-implies-block", [n, level](Check& c) {
    int tested = 0, draws = 0;
    while (tested < n && draws < 50 * n) {
      ++draws;
      const SequenceOperator t1 = gen::random_factor(c.rng), t2 = gen::random_factor(c.rng);
      const ComplementedSubspace v1 = gen::random_target(c.rng), v2 = gen::random_target(c.rng);
      if (!is_transversal(t1, v1) || !is_transversal(t2, v2)) continue;
      ++tested;
      const BlockOperator b(t1, FiniteRankOperator(c.rng.integer_matrix(4, 4, -2, 2)), t2);
      const Json inst{{"F", to_json(t1)}, {"F2", to_json(t2)}, {"P", to_json(b.p().entries())},
                      {"V1", gen::subspace_json(v1, 12)}, {"V2", gen::subspace_json(v2, 12)}};
      c.require(is_transversal(b, v1, v2), "block not transversal at the default level", inst);
      c.require(is_transversal(b, v1, v2, {.level = 2 * level}), "block not transversal at the doubled truncation", inst);

      const Vector y1 = c.rng.normal_vector(6), y2 = c.rng.normal_vector(6);
      const BlockWitness w = block_transversality_witness(b, v1, v2, y1, y2);
      const auto [a1, a2] = b.apply(w.e1, w.e2);
      const double r = std::max(linalg::max_abs(seq::sub(seq::add(a1, w.v1), y1)),
                                linalg::max_abs(seq::sub(seq::add(a2, w.v2), y2)));
      c.bound("witness_residual", r, 1e-10, inst);
      c.require(contains(v1.span, w.v1, 1e-8) && contains(v2.span, w.v2, 1e-8), "witness v outside V1 ⊕ V2", inst);
      c.require(is_complemented(block_preimage_with_complement(b, v1, v2)), "constructed complement fails", inst);
    }
    c.require(tested == n, "too few transversal instances drawn");
    c.record("instances", tested);
  });
}

inline void suite_composition_transversality(SuiteContext& ctx) {
  const int n = std::max(64, 2 * ctx.config.samples);
  const Index level = ctx.config.truncation;
  ctx.check("iff-on-linear-fixtures", [n, level](Check& c) {
    int tested = 0, positives = 0, draws = 0;
    while (tested < n && draws < 50 * n) {
      ++draws;
      const SequenceOperator g = gen::random_factor(c.rng), h = gen::random_factor(c.rng);
      const ComplementedSubspace z = gen::random_target(c.rng);
      if (!is_transversal(g, z)) continue;
      ++tested;
      const bool lhs = is_transversal(h, preimage_with_complement(g, z));
      const bool rhs = is_transversal(compose(g, h), z);
      const bool deep = is_transversal(compose(g, h), z, {.level = 2 * level});
      positives += lhs;
      c.require(lhs == rhs && rhs == deep, "composition law disagrees with the direct test",
                Json{{"g", to_json(g)}, {"h", to_json(h)}, {"Z", gen::subspace_json(z, 12)}, {"lhs", lhs}, {"rhs", rhs}});
    }
    c.record("instances", tested);
    c.record("transversal", positives);
    c.require(positives > 0 && positives < tested, "fixtures exercise only one direction");
  });
}

inline void suite_dnc_vspace_iso(SuiteContext& ctx) {
  const int n = 8 * ctx.config.samples;
  ctx.check("round-trips", [n](Check& c) {
    const ManifoldPair pair = catalog::linear_pair(5, {0, 1, 2, 3, 4}, {1, 3});
    for (int i = 0; i < n; ++i) {
      const bool boundary = i % 4 == 0;
      const DncPoint p = gen::random_dnc_point(pair, c.rng, boundary);
      const DncPoint q = dnc_vspace_iso_inverse(pair, dnc_vspace_iso(pair, p));
      c.bound("point_round_trip", distance(p, q), 1e-12, to_json(p));
      c.require(q.lambda == p.lambda, "lambda changed", to_json(p));
      const FlatPoint f{c.rng.normal_vector(5), boundary ? 0.0 : c.rng.uniform(-2.0, 2.0)};
      const FlatPoint g = dnc_vspace_iso(pair, dnc_vspace_iso_inverse(pair, f));
      c.bound("flat_round_trip", (g.w - f.w).norm(), 1e-12, Json{{"w", to_json(f.w)}, {"t", f.t}});
      c.require(g.t == f.t, "t changed");
    }
    c.record("points", n);
  });
  ctx.check("intertwines-linear-maps", [](Check& c) {
    const ManifoldPair pair = catalog::euclidean_pair(4, 2);
    Matrix a(4, 4);
    for (Index j = 0; j < 4; ++j) a.col(j) = c.rng.normal_vector(4);
    a.bottomLeftCorner(2, 2).setZero();
    const PairMap fp{pair, pair, SmoothMap::linear(a)};
    for (int i = 0; i < 60; ++i) {
      const DncPoint p = gen::random_dnc_point(pair, c.rng, i % 3 == 0);
      const FlatPoint w = dnc_vspace_iso(pair, p);
      Matrix at = a;
      at.topRightCorner(2, 2) *= w.t;
      const FlatPoint img = dnc_vspace_iso(pair, dnc_map(fp, p));
      c.bound("intertwining", (img.w - at * w.w).norm(), 1e-12, to_json(p));
    }
  });
}

inline void suite_dnc_product(SuiteContext& ctx) {
  const int n = 2 * ctx.config.samples;
  ctx.check("split-join", [n](Check& c) {
    const ManifoldPair sa = catalog::sphere_pair(2, 1), ea = catalog::euclidean_pair(3, 1);
    const ManifoldPair prod = product(sa, ea);
    for (int i = 0; i < n; ++i) {
      const DncPoint q = gen::random_dnc_point(prod, c.rng, i % 2 == 0);
      const auto [l, r] = dnc_product_split(q, 3);
      validate(sa, l);
      validate(ea, r);
      c.require(l.lambda == q.lambda && r.lambda == q.lambda, "lambda not shared by the factors", to_json(q));
      c.bound("round_trip", distance(dnc_product_join(l, r), q), 1e-10, to_json(q));
    }
  });
  ctx.check("product-maps-split", [n](Check& c) {
    const PairMap f = fixtures::plane_shear().map, g = fixtures::sphere_rotation().map;
    const PairMap fg = product(f, g);
    for (int i = 0; i < n; ++i) {
      const DncPoint q = gen::random_dnc_point(fg.source, c.rng, i % 2 == 0);
      const auto [l, r] = dnc_product_split(q, 2);
      c.bound("map_split", distance(dnc_map(fg, q), dnc_product_join(dnc_map(f, l), dnc_map(g, r))), 1e-10, to_json(q));
    }
  });
}

inline void suite_trivial_bundle(SuiteContext& ctx) {
  const int n = 3 * ctx.config.samples;
  ctx.check("split-join", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const bool pair = i % 2 == 0;
      const Vector a = c.rng.normal_vector(5), b = c.rng.normal_vector(5);
      const TgElement e = pair ? TgElement::pair(a, b, c.rng.uniform(0.1, 2.0)) : TgElement::tangent(a, b);
      const auto [base, fib] = trivial_bundle_split(e, 2);
      c.require(base.lambda == e.lambda, "lambda changed", to_json(e));
      c.bound("round_trip", distance(trivial_bundle_join(base, fib), e), 1e-10, to_json(e));
    }
  });
  ctx.check("fiberwise-linear", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const double lam = i % 2 ? c.rng.uniform(0.1, 2.0) : 0.0;
      const Vector m = c.rng.normal_vector(2), m2 = c.rng.normal_vector(2);
      const TgElement base = lam != 0.0 ? TgElement::pair(m, m2, lam) : TgElement::tangent(m, m2);
      const BundleFiber f1{c.rng.normal_vector(2), c.rng.normal_vector(2)}, f2{c.rng.normal_vector(2), c.rng.normal_vector(2)};
      const double a = c.rng.normal(), b = c.rng.normal();
      const TgElement e1 = trivial_bundle_join(base, f1), e2 = trivial_bundle_join(base, f2);
      TgElement combo = e1;
      combo.x.tail(2) = a * e1.x.tail(2) + b * e2.x.tail(2);
      combo.y.tail(2) = a * e1.y.tail(2) + b * e2.y.tail(2);
      const auto [cb, cf] = trivial_bundle_split(combo, 2);
      c.require(cb == base, "base changed under a fiber combination", to_json(combo));
      c.bound("linearity", std::max((cf.u - (a * f1.u + b * f2.u)).norm(), (cf.w - (a * f1.w + b * f2.w)).norm()),
              1e-10, to_json(combo));
    }
    c.record("points", n);
  });
}

inline void suite_dnc_functoriality(SuiteContext& ctx) {
  const int n = ctx.config.samples;
  ctx.check("dnc-map-composition", [n](Check& c) {
    const std::vector<std::pair<PairMap, PairMap>> pairs{
        {fixtures::plane_shear().map, fixtures::plane_quadratic().map},
        {fixtures::sphere_bulge().map, fixtures::sphere_rotation().map},
        {fixtures::plane_quadratic().map, fixtures::plane_taylor().map}};
    for (const auto& [f, g] : pairs) {
      const PairMap gf = compose(g, f);
      for (int i = 0; i < n; ++i) {
        const DncPoint p = gen::random_dnc_point(f.source, c.rng, i % 2 == 1);
        const DncPoint a = dnc_map(gf, p), b = dnc_map(g, dnc_map(f, p));
        c.bound("composition", distance(a, b), 1e-6, to_json(p));
        c.require(a.lambda == p.lambda && b.lambda == p.lambda, "lambda changed", to_json(p));
      }
    }
  });
  ctx.check("tangent-groupoid-homomorphism", [n](Check& c) {
    const SmoothMap f = fixtures::plane_shear().map.f;
    for (int i = 0; i < n; ++i) {
      const Vector x = c.rng.normal_vector(2), y = c.rng.normal_vector(2), z = c.rng.normal_vector(2);
      const double lam = c.rng.uniform(0.1, 2.0);
      const TgElement p = TgElement::pair(x, y, lam), q = TgElement::pair(y, z, lam);
      c.bound("pair_composition", distance(tg_map(f, tg_compose(p, q)), tg_compose(tg_map(f, p), tg_map(f, q))), 1e-6,
              to_json(p));
      const TgElement u = TgElement::tangent(x, y), v = TgElement::tangent(x, z);
      c.bound("tangent_composition", distance(tg_map(f, tg_compose(u, v)), tg_compose(tg_map(f, u), tg_map(f, v))),
              1e-6, to_json(u));
      c.bound("inverse", distance(tg_map(f, tg_inverse(p)), tg_inverse(tg_map(f, p))), 1e-6, to_json(p));
    }
  });
}

inline void suite_taylor_remainder(SuiteContext& ctx) {
  ctx.check("nonlinear-slopes", [](Check& c) {
    for (const fixtures::PairFixture& f : fixtures::taylor_fixtures()) {
      const fixtures::Probe p = fixtures::default_probe(f);
      const TaylorProbe t = taylor_probe(f.map, f.source_tub, f.target_tub, p.m, p.x, halving_steps());
      c.require(!t.exact, f.name + ": remainder vanished on a nonlinear fixture");
      c.at_least("slope:" + f.name, t.slope, 0.9, Json{{"fixture", f.name}, {"m", to_json(p.m)}, {"x", to_json(p.x)}});
    }
  });
  ctx.check("linear-remainder", [](Check& c) {
    for (const fixtures::PairFixture& f : {fixtures::plane_linear(), fixtures::sphere_rotation()}) {
      const fixtures::Probe p = fixtures::default_probe(f);
      const TaylorProbe t = taylor_probe(f.map, f.source_tub, f.target_tub, p.m, p.x, halving_steps());
      for (double r : t.remainder) c.bound("max_remainder", r, 1e-10, Json{{"fixture", f.name}});
    }
  });
}

inline void suite_normal_block_structure(SuiteContext& ctx) {
  const int n = std::max(4, ctx.config.samples / 3);
  ctx.check("upper-right-vanishes", [n](Check& c) {
    for (const fixtures::PairFixture& f : {fixtures::plane_quadratic(), fixtures::plane_shear(), fixtures::sphere_bulge(),
                                           fixtures::space_to_plane()}) {
      for (int i = 0; i < n; ++i) {
        const Vector m = f.map.source.small.sample(c.rng);
        const Matrix nf = normal_frame(f.map.source, m);
        const Vector x = (nf * c.rng.normal_vector(nf.cols())).normalized();
        const Json inst{{"fixture", f.name}, {"m", to_json(m)}, {"x", to_json(x)}};
        const double r = check_block_structure(f.map, f.source_tub, f.target_tub, m, x).residual;
        c.bound("max_upper_right", r, 1e-6, inst);
        const double r1 = check_block_structure(f.map, f.source_tub, f.target_tub, m, x, {.h = 0.02}).residual;
        const double r2 = check_block_structure(f.map, f.source_tub, f.target_tub, m, x, {.h = 0.01}).residual;
        if (r1 < 1e-9) {
          c.count("exact_points");
          continue;
        }
        c.at_least("min_observed_order", std::log2(r1 / r2), 1.9, inst);
      }
    }
  });
}

inline void suite_groupoid_axioms(SuiteContext& ctx) {
  const int n = 8 * ctx.config.samples;
  ctx.check("associativity-units-inverses", [n](Check& c) {
    for (int i = 0; i < n; ++i) {
      const Vector x = c.rng.dyadic_vector(3), y = c.rng.dyadic_vector(3), z = c.rng.dyadic_vector(3),
                   w = c.rng.dyadic_vector(3);
      if (i % 2 == 0) {
        const double lam = 0.25 * c.rng.integer(1, 8) * (c.rng.integer(0, 1) ? 1.0 : -1.0);
        const TgElement p = TgElement::pair(x, y, lam), q = TgElement::pair(y, z, lam), r = TgElement::pair(z, w, lam);
        c.require(tg_compose(tg_compose(p, q), r) == tg_compose(p, tg_compose(q, r)), "pair associativity", to_json(p));
        c.require(tg_compose(tg_unit(x, lam), p) == p && tg_compose(p, tg_unit(y, lam)) == p, "pair units", to_json(p));
        c.require(tg_compose(p, tg_inverse(p)) == tg_unit(x, lam) && tg_compose(tg_inverse(p), p) == tg_unit(y, lam),
                  "pair inverses", to_json(p));
      } else {
        const TgElement u = TgElement::tangent(x, y), v = TgElement::tangent(x, z), s = TgElement::tangent(x, w);
        c.require(tg_compose(tg_compose(u, v), s) == tg_compose(u, tg_compose(v, s)), "tangent associativity",
                  to_json(u));
        c.require(tg_compose(tg_unit(x, 0.0), u) == u && tg_compose(u, tg_unit(x, 0.0)) == u, "tangent units",
                  to_json(u));
        c.require(tg_compose(u, tg_inverse(u)) == tg_unit(x, 0.0), "tangent inverses", to_json(u));
      }
    }
    c.record("triples", n);
  });
}

inline void suite_dnc_transversality(SuiteContext& ctx) {
  const int n = ctx.config.samples;
  const double tol = ctx.config.tol;
  std::vector<DncProblem> problems = fixtures::dnc_problems();
  for (const DncProblem& pb : fixtures::groupoid_problems()) problems.push_back(pb);
  for (const DncProblem& pb : problems)
    ctx.check("membership:" + pb.name, [pb, n, tol](Check& c) {
      const DncTransversalityReport rep = dnc_transversality_check(pb, dnc_samples(pb, c.rng, n), tol);
      c.record("samples", rep.samples);
      c.record("members", rep.members);
      c.record("boundary_checks", rep.boundary_checks);
      c.bound("max_upper_right", rep.max_upper_right, 1e-6);
      c.require(rep.passed(), rep.failures.empty() ? std::string() : rep.failures.front());
      c.require(rep.boundary_checks > 0, "no boundary samples were checked");
    });
  ctx.check("non-transverse-rejected", [](Check& c) {
    const DncProblem pb = fixtures::non_transverse_problem();
    bool raised = false;
    try {
      dnc_transversality_check(pb, {DncPoint::boundary(fixtures::vec({0, 0}), fixtures::vec({0, 1}))});
    } catch (const PreconditionFailed&) {
      raised = true;
    }
    c.require(raised, "non-transverse fixture was not rejected");
  });
}

inline void suite_flag_laws(SuiteContext& ctx) {
  const Index depth = ctx.config.depth;
  ctx.check("derived-flags", [depth](Check& c) {
    const DimensionSequence d = gen::doubling(depth);
    const Flag std_flag = standard_flag(d);
    Matrix k = c.rng.integer_matrix(5, 5, -1, 1);
    while (linalg::inverse_condition(Matrix(Matrix::Identity(5, 5) + k)) < 1e-3) k = c.rng.integer_matrix(5, 5, -1, 1);
    const Flag rot = rotated_flag(d, SequenceOperator::identity_plus(k));
    std::vector<Index> idx;
    for (Index n = 1; n <= depth; n += 2) idx.push_back(n);
    const std::vector<std::pair<std::string, Flag>> flags{{"standard", std_flag},
                                                          {"rotated", rot},
                                                          {"subsequence", flag_subsequence(rot, idx)},
                                                          {"product", flag_product(std_flag, rot)},
                                                          {"groupoid", flag_groupoid(rot)}};
    for (const auto& [name, f] : flags) {
      const ConditionReport r = verify_flag(f);
      c.require(r.passed(), name + " flag fails verification", to_json(r));
    }
    const Flag prod = flag_product(std_flag, rot), grp = flag_groupoid(rot);
    for (Index n = 1; n <= depth; ++n) {
      c.require(prod.delta(n) == 2 * d(n), "product flag dimension", Json{{"level", n}});
      c.require(grp.delta(n) == 2 * d(n) + 1, "groupoid flag dimension", Json{{"level", n}});
    }
  });
  ctx.check("rotation-outside-glk-rejected", [](Check& c) {
    bool raised = false;
    try {
      rotated_flag(DimensionSequence({1, 2}), SequenceOperator::shift(1));
    } catch (const NotGLK&) {
      raised = true;
    }
    c.require(raised, "shift accepted as a flag rotation");
  });
}

inline void suite_filtration_sphere(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  ctx.check("dimensions-and-conditions", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(cfg.depth, cfg.truncation);
    std::vector<Index> expect, measured;
    for (Index n = 1; n <= cfg.depth; ++n) expect.push_back((Index{1} << n) - 1);
    c.require(gen::dims(f) == expect, "sphere levels do not have dimensions δ - 1");
    c.require(gen::rank_dims_match(f, c.rng, 4, measured), "Jacobian rank dimensions differ");
    c.record("dims", measured);
    const ConditionReport r = verify_filtration(f, {.samples = cfg.samples, .seed = cfg.seed});
    gen::expect_report(c, f.name, r, {"a", "b", "d", "e", "density", "fredholm"});
    c.record("coverage", r.find("e")->evidence);
  });
  ctx.check("density-profile-strictly-decreasing", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(cfg.depth, cfg.truncation);
    for (int i = 0; i < cfg.samples; ++i) {
      const Vector x = f.ambient.sample(c.rng);
      double prev = std::numeric_limits<double>::infinity();
      for (Index n = 1; n <= f.depth(); ++n) {
        const double d = f.distance(x, n);
        c.require(d < prev, "distance profile not strictly decreasing", Json{{"x", to_json(x)}, {"level", n}});
        prev = d;
      }
      c.bound("deepest_truncation_gap", f.distance(f.truncate(x, f.depth()), f.depth()), cfg.tol);
    }
  });
}

inline Index small_depth(const SuiteConfig& cfg) { return std::min<Index>(cfg.depth, 3); }

inline void suite_filtration_pair_groupoid(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  ctx.check("dimensions-and-conditions", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(small_depth(cfg), 0);
    const Filtration g = pair_groupoid_filtration(f);
    std::vector<Index> measured;
    for (Index n = 1; n <= f.depth(); ++n)
      c.require(g.level(n).dim == 2 * f.delta(n), "pair level dimension is not 2δ", Json{{"level", n}});
    c.require(gen::rank_dims_match(g, c.rng, 4, measured), "Jacobian rank dimensions differ");
    c.record("dims", measured);
    gen::expect_report(c, g.name, verify_filtration(g, {.samples = cfg.samples / 2 + 1, .seed = cfg.seed}),
                       {"a", "b", "d", "fredholm"});
  });
  ctx.check("groupoid-shape", [cfg](Check& c) {
    const Filtration g = pair_groupoid_filtration(gen::sphere_tower(small_depth(cfg), 0));
    for (const ImplicitManifold& l : g.levels) c.require(swap_closed(l, c.rng), l.name + " is not closed under inversion");
    const Filtration skew = make_filtration_product(make_filtration_linear(standard_flag(DimensionSequence({1, 2})), 3),
                                                    make_filtration_linear(standard_flag(DimensionSequence({2, 3})), 2));
    c.require(!swap_closed(skew.level(1), c.rng), "interleaved tower M_1 x M_2 accepted as groupoid-shaped");
  });
}

inline void suite_filtration_tangent(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  ctx.check("dimensions-and-conditions", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(small_depth(cfg), 0);
    const Filtration t = tangent_filtration(f);
    std::vector<Index> measured;
    for (Index n = 1; n <= f.depth(); ++n)
      c.require(t.level(n).dim == 2 * f.delta(n), "tangent level dimension is not 2δ", Json{{"level", n}});
    c.require(gen::rank_dims_match(t, c.rng, 4, measured), "Jacobian rank dimensions differ");
    c.record("dims", measured);
    const ConditionReport r = verify_filtration(t, {.samples = cfg.samples / 2 + 1, .seed = cfg.seed});
    gen::expect_report(c, t.name, r, {"a", "b", "d", "fredholm"});
    c.record("density_measured", std::string(to_string(r.status_of("density"))));
  });
  ctx.check("missing-witness", [](Check& c) {
    bool raised = false;
    try {
      tangent_filtration(make_filtration_projective(DimensionSequence({2, 3}), 1));
    } catch (const MissingWitness&) {
      raised = true;
    }
    c.require(raised, "witness-free filtration accepted");
  });
}

inline void suite_filtration_tangent_groupoid(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  ctx.check("dimensions-and-conditions", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(std::min<Index>(cfg.depth, 2), 0);
    const Filtration t = tangent_groupoid_filtration(f);
    std::vector<Index> measured;
    for (Index n = 1; n <= f.depth(); ++n)
      c.require(t.level(n).dim == 2 * f.delta(n) + 1, "tangent groupoid level dimension is not 2δ + 1",
                Json{{"level", n}});
    c.require(gen::rank_dims_match(t, c.rng, 4, measured), "Jacobian rank dimensions differ");
    c.record("dims", measured);
    gen::expect_report(c, t.name, verify_filtration(t, {.samples = cfg.samples / 4 + 1, .seed = cfg.seed}),
                       {"a", "b", "d", "fredholm"});
  });
  ctx.check("slices", [cfg](Check& c) {
    const Filtration f = gen::sphere_tower(std::min<Index>(cfg.depth, 2), 0);
    const Filtration t = tangent_groupoid_filtration(f), pair = pair_groupoid_filtration(f), tan = tangent_filtration(f);
    for (Index n = 1; n <= f.depth(); ++n)
      for (int i = 0; i < cfg.samples / 2 + 1; ++i) {
        const TgElement e = tg_from_coordinates(t.level(n).sample(c.rng));
        const Vector z = linalg::concat(e.x, e.y);
        const double r = e.is_pair() ? pair.level(n).residual(z) : tan.level(n).residual(z);
        c.bound(e.is_pair() ? "pair_slice" : "tangent_slice", r, cfg.tol, to_json(e));
      }
  });
}

inline void suite_filtration_pullbacks(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  ctx.check("fredholm-pullback", [cfg](Check& c) {
    const Filtration f = make_filtration_linear(standard_flag(gen::doubling(small_depth(cfg))), 2);
    const Index d = f.ambient.ambient_dim, p = 2;
    Matrix g(d, d + p);
    for (Index j = 0; j < d + p; ++j) g.col(j) = c.rng.normal_vector(d);
    const Filtration pb = pullback_filtration_fredholm(catalog::euclidean(d + p), SmoothMap::linear(g), f);
    for (Index n = 1; n <= f.depth(); ++n)
      c.require(pb.delta(n) == f.delta(n) + p, "pulled-back dimension is not δ + p", Json{{"level", n}});
    std::vector<Index> measured;
    c.require(gen::rank_dims_match(pb, c.rng, 4, measured), "Jacobian rank dimensions differ");
    c.record("dims", measured);
    gen::expect_report(c, pb.name, verify_filtration(pb, {.samples = cfg.samples / 2 + 1, .seed = cfg.seed}),
                       {"a", "b", "d", "fredholm"});
  });
  ctx.check("non-transverse-rejected", [](Check& c) {
    const Filtration f = make_filtration_linear(standard_flag(DimensionSequence({1, 2, 3})), 1);
    Matrix collapse = Matrix::Identity(4, 4);
    collapse(1, 1) = 0.0;
    bool raised = false;
    try {
      pullback_filtration_fredholm(catalog::euclidean(4), SmoothMap::linear(collapse), f);
    } catch (const NotTransverse&) {
      raised = true;
    }
    c.require(raised, "non-transverse map accepted");
  });
  ctx.check("covering-pullback", [cfg](Check& c) {
    const Index depth = small_depth(cfg);
    const DimensionSequence delta = gen::doubling(depth);
    const Filtration rp = make_filtration_projective(delta, 1);
    const Filtration sp = make_filtration_sphere(standard_flag(delta), 1);
    const Index d = sp.ambient.ambient_dim;
    auto lifts = [d](const Vector& q) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(catalog::smat(q, d));
      const Vector x = es.eigenvectors().col(d - 1);
      return std::vector<Vector>{x, Vector(-x)};
    };
    const Filtration pb =
        pullback_filtration_covering(catalog::sphere(d - 1, d), catalog::double_cover(d - 1, d - 1), lifts, rp);
    c.require(pb.delta.values() == rp.delta.values(), "covering pullback changed dimensions");
    for (Index n = 1; n <= depth; ++n)
      for (int i = 0; i < 8; ++i) {
        c.bound("lift_on_sphere_level", sp.level(n).residual(pb.level(n).sample(c.rng)), 1e-10);
        c.bound("sphere_level_in_pullback", pb.level(n).residual(sp.level(n).sample(c.rng)), 1e-10);
      }
    gen::expect_report(c, pb.name, verify_filtration(pb, {.samples = cfg.samples / 4 + 1, .seed = cfg.seed}),
                       {"a", "b", "density"});
    const SmoothMap fold{1, 1, [](const Vector& x) { return Vector(x.array().square()); }, {}};
    auto roots = [](const Vector& y) {
      const double r = std::sqrt(std::max(0.0, y[0]));
      return std::vector<Vector>{Vector::Constant(1, r), Vector::Constant(1, -r)};
    };
    bool raised = false;
    try {
      pullback_filtration_covering(catalog::euclidean(1), fold, roots,
                                   make_filtration_linear(standard_flag(DimensionSequence({1})), 0));
    } catch (const NotCovering&) {
      raised = true;
    }
    c.require(raised, "fold map accepted as a covering");
  });
}

inline void suite_filtration_examples(SuiteContext& ctx) {
  const SuiteConfig cfg = ctx.config;
  const int s = cfg.samples / 2 + 1;
  ctx.check("dense-normal-examples", [cfg, s](Check& c) {
    const Flag flag = standard_flag(gen::doubling(small_depth(cfg)));
    const Filtration lin = make_filtration_linear(flag);
    gen::expect_report(c, lin.name, verify_filtration(lin, {.samples = s, .seed = cfg.seed}),
                       {"a", "b", "d", "e", "density", "fredholm"});
    const Filtration open = make_filtration_open_subset(
        [](const Vector& x) { return (x - Vector::Unit(x.size(), 0)).norm() < 1.5; }, flag);
    gen::expect_report(c, open.name, verify_filtration(open, {.samples = s, .seed = cfg.seed}), {"a", "b", "d"});
    const Filtration prod = make_filtration_product(lin, gen::sphere_tower(small_depth(cfg), 0));
    gen::expect_report(c, prod.name, verify_filtration(prod, {.samples = s, .seed = cfg.seed}),
                       {"a", "b", "d", "density"});
    std::vector<Index> idx{1};
    if (small_depth(cfg) > 1) idx.push_back(small_depth(cfg));
    const Filtration sub = subsequence_filtration(gen::sphere_tower(small_depth(cfg), 0), idx);
    gen::expect_report(c, sub.name, verify_filtration(sub, {.samples = s, .seed = cfg.seed}), {"a", "b", "d"});
  });
  ctx.check("negative-examples", [cfg, s](Check& c) {
    const Filtration triv =
        make_filtration_with_trivial_factor(make_filtration_linear(standard_flag(DimensionSequence({1, 2})), 2), 2);
    const ConditionReport r = verify_filtration(triv, {.samples = s, .seed = cfg.seed});
    c.require(r.status_of("density") == Status::fail, "trivial-factor example reported dense");
    c.require(r.find("fredholm")->evidence == "not claimed", "trivial-factor example claims Fredholm data");
    c.require(r.status_of("d") == Status::pass, "trivial-factor witnesses fail");
    const Filtration mixed = make_filtration_product(gen::sphere_tower(2, 0),
                                                     make_filtration_projective(DimensionSequence({2, 4}), 1));
    const ConditionReport m = verify_filtration(mixed, {.samples = s / 2 + 1, .seed = cfg.seed});
    c.require(m.status_of("d") == Status::unverified, "witness-free product did not report normality unverified");
    c.require(m.status_of("fredholm") == Status::unverified, "witness-free product reports Fredholm data");
  });
}

inline const Registry& builtin_registry() {
  static const Registry reg = [] {
    Registry r;
    r.add({"block-index-zero", "index of lower block triangular operators with GL_K diagonal",
           suite_block_index_zero});
    r.add({"retraction", "straight-line retraction of GL~_K onto its block diagonal", suite_retraction});
    r.add({"block-transversality", "block transversality from factorwise transversality",
           suite_block_transversality});
    r.add({"composition-transversality", "transversality of composites through preimages",
           suite_composition_transversality});
    r.add({"dnc-vspace-iso", "DNC of a vector-space pair", suite_dnc_vspace_iso});
    r.add({"dnc-product", "DNC of a product of pairs", suite_dnc_product});
    r.add({"trivial-bundle", "tangent groupoid of M x R^k as a trivial bundle",
           suite_trivial_bundle});
    r.add({"dnc-functoriality", "DNC functor on maps of pairs and the tangent groupoid functor",
           suite_dnc_functoriality});
    r.add({"taylor-remainder", "first-order Taylor remainder in DNC charts",
           suite_taylor_remainder});
    r.add({"normal-block-structure", "block structure of the normal-bundle differential",
           suite_normal_block_structure});
    r.add({"groupoid-axioms", "tangent groupoid axioms",
           suite_groupoid_axioms});
    r.add({"dnc-transversality", "DNC of transverse preimages",
           suite_dnc_transversality});
    r.add({"flag-laws", "Δ-flags and derived 2Δ and 2Δ+1 flags", suite_flag_laws});
    r.add({"filtration-sphere", "sphere (Δ-1)-filtration",
           suite_filtration_sphere});
    r.add({"filtration-pair-groupoid", "pair groupoid 2Δ-filtration", suite_filtration_pair_groupoid});
    r.add({"filtration-tangent", "tangent bundle 2Δ-filtration", suite_filtration_tangent});
    r.add({"filtration-tangent-groupoid", "tangent groupoid (2Δ+1)-filtration",
           suite_filtration_tangent_groupoid});
    r.add({"filtration-pullbacks", "pullbacks along Fredholm maps and coverings",
           suite_filtration_pullbacks});
    r.add({"filtration-examples", "basic Δ-filtration constructions",
           suite_filtration_examples});
    return r;
  }();
  return reg;
}

inline SuiteReport run_suite(const SuiteConfig& config) { return run_suite(config, builtin_registry()); }
inline AggregateReport run_all(const SuiteConfig& overrides, int jobs = 1) {
  return run_all(overrides, builtin_registry(), jobs);
}

}  // namespace dnclab::harness
