// Acceptance run: one PASS/FAIL line per criterion with its measured values
// and wall time against the limit. Exit status 0 iff every line passes.
//
// Usage: acceptance [path-to-dnclab-cli]

#include "dnclab/harness/suites.hpp"
#include "oracle.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <sys/wait.h>

using namespace dnclab;
using harness::gen::random_factor;
using harness::gen::random_glk;
using harness::gen::random_target;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double limit_s;
  std::function<void(Outcome&)> run;
};

std::string g(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

Index oracle_dim(const ImplicitManifold& m, Rng& rng, int samples, bool& consistent) {
  Index got = -1;
  for (int i = 0; i < samples; ++i) {
    const Vector x = m.sample(rng);
    const Index d = m.ambient_dim - oracle::rank(m.constraint_jacobian(x));
    if (got >= 0 && d != got) consistent = false;
    got = d;
  }
  return got;
}

std::vector<Index> oracle_dims(const Filtration& f, Rng& rng, bool& consistent) {
  std::vector<Index> out;
  for (const ImplicitManifold& m : f.levels) out.push_back(oracle_dim(m, rng, 3, consistent));
  return out;
}

std::string list(const std::vector<Index>& v) {
  std::ostringstream s;
  s << "(";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  s << ")";
  return s.str();
}

// ---------------------------------------------------------------------------

void block_index_zero(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 1);
  long worst = 0, oracle_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    const SequenceOperator f = random_glk(rng, rng.integer(1, 4)), f2 = random_glk(rng, rng.integer(1, 4));
    const FiniteRankOperator p(rng.integer_matrix(rng.integer(1, 5), rng.integer(1, 5), -3, 3));
    const SequenceOperator flat = BlockOperator(f, p, f2).flatten();
    const long idx = fredholm_index(flat);
    worst = std::max(worst, std::labs(idx));
    if (oracle::fredholm(flat, 64).index() != idx) ++oracle_mismatch;
  }
  long additivity = 0;
  for (int i = 0; i < 200; ++i) {
    const SequenceOperator f = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator f2 = SequenceOperator::shift_plus(rng.integer(-3, 3), rng.integer_matrix(3, 3, -1, 1));
    const SequenceOperator flat = BlockOperator(f, FiniteRankOperator(rng.integer_matrix(4, 4, -2, 2)), f2).flatten();
    const long lhs = fredholm_index(flat);
    if (lhs != fredholm_index(f) + fredholm_index(f2) || lhs != oracle::fredholm(flat, 64).index()) ++additivity;
  }
  o.note << "200 blocks, max |index| " << worst << ", oracle mismatches " << oracle_mismatch
         << "; additivity mismatches " << additivity << "/200";
  o.require(worst == 0, "nonzero index");
  o.require(oracle_mismatch == 0, "oracle disagrees");
  o.require(additivity == 0, "index not additive");
}

void retraction(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 2);
  double worst = 1.0;
  int exact_ends = 0, drawn = 0;
  while (drawn < 100) {
    const Index k = rng.integer(1, 3);
    const BlockOperator b(random_glk(rng, k), FiniteRankOperator(rng.integer_matrix(k, k, -3, 3)), random_glk(rng, k));
    if (!is_glk_tilde(b)) continue;
    ++drawn;
    for (int s = 0; s <= 100; ++s) {
      const SequenceOperator flat = retraction_path(b, s / 100.0).flatten();
      const Index level = 2 * (flat.window() + 4);
      worst = std::min(worst, oracle::inverse_condition(oracle::dense(flat, level, level)));
    }
    const BlockOperator end = retraction_path(b, 1.0);
    exact_ends += retraction_path(b, 0.0).flatten() == b.flatten() && end.p().entries().isZero(0.0) &&
                  end.f() == b.f() && end.f2() == b.f2();
  }
  o.note << "100 paths x 101 points, min sigma_min/sigma_max " << g(worst) << ", exact endpoints " << exact_ends
         << "/100";
  o.require(worst >= 1e-8, "path leaves the invertibles");
  o.require(exact_ends == 100, "endpoint mismatch");
}

void block_transversality(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 3);
  int tested = 0, transversal = 0, oracle_ok = 0, complements = 0;
  double witness = 0.0;
  while (tested < 200) {
    const SequenceOperator t1 = random_factor(rng), t2 = random_factor(rng);
    const ComplementedSubspace v1 = random_target(rng), v2 = random_target(rng);
    if (!is_transversal(t1, v1) || !is_transversal(t2, v2)) continue;
    ++tested;
    const BlockOperator b(t1, FiniteRankOperator(rng.integer_matrix(4, 4, -2, 2)), t2);
    transversal += is_transversal(b, v1, v2) && is_transversal(b, v1, v2, {.level = 48});
    oracle_ok += oracle::transversal_multi(b.flatten(), interleave(v1, v2).span.generators(40), 64);
    const Vector y1 = rng.normal_vector(6), y2 = rng.normal_vector(6);
    const BlockWitness w = block_transversality_witness(b, v1, v2, y1, y2);
    const auto [a1, a2] = b.apply(w.e1, w.e2);
    witness = std::max({witness, linalg::max_abs(seq::sub(seq::add(a1, w.v1), y1)),
                        linalg::max_abs(seq::sub(seq::add(a2, w.v2), y2))});
    const ComplementedSubspace c = block_preimage_with_complement(b, v1, v2);
    const Index level = 2 * (c.support_bound() + 4);
    const Matrix s = c.span.generators(level), q = c.complement.generators(level);
    const Index rs = oracle::rank(s), rq = oracle::rank(q);
    bool ok = rs + rq == level && oracle::rank(linalg::hcat(s, q)) == level;
    // Span generators map into V1 ⊕ V2.
    const Matrix vg = interleave(v1, v2).span.generators(level + 32);
    for (Index j = 0; j < s.cols() && ok; ++j) {
      const Vector img = linalg::resized(b.flatten().apply(s.col(j)), vg.rows());
      ok = oracle::rank(linalg::hcat(vg, img)) == oracle::rank(vg);
    }
    complements += ok;
  }
  o.note << "200 instances, block transversal at 2 levels " << transversal << "/200, dense oracle " << oracle_ok
         << "/200, max witness residual " << g(witness) << ", complements exact " << complements << "/200";
  o.require(transversal == 200 && oracle_ok == 200, "block transversality");
  o.require(witness <= 1e-10, "witness residual");
  o.require(complements == 200, "complement");
}

void composition_law(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 4);
  int tested = 0, agree = 0, positives = 0;
  while (tested < 100) {
    const SequenceOperator g1 = random_factor(rng), h = random_factor(rng);
    const ComplementedSubspace z = random_target(rng);
    if (!is_transversal(g1, z)) continue;
    ++tested;
    const bool lhs = is_transversal(h, preimage_with_complement(g1, z));
    const bool rhs = is_transversal(compose(g1, h), z);
    const bool dense = oracle::transversal_multi(compose(g1, h), z.span.generators(40), 64);
    agree += lhs == rhs && rhs == dense;
    positives += lhs;
  }
  o.note << "100 fixtures, agreement " << agree << "/100 (" << positives << " transversal, " << 100 - positives
         << " not)";
  o.require(agree == 100, "iff violated");
  o.require(positives > 0 && positives < 100, "only one direction exercised");
}

void vspace_iso(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 5);
  const ManifoldPair pair = catalog::linear_pair(5, {0, 1, 2, 3, 4}, {1, 3});
  const std::array<bool, 5> in{false, true, false, true, false};
  double trip = 0.0, formula = 0.0;
  int boundary = 0, lambda_ok = 0;
  for (int i = 0; i < 500; ++i) {
    const DncPoint p = harness::gen::random_dnc_point(pair, rng, i % 5 == 0);
    boundary += !p.is_interior();
    const FlatPoint w = dnc_vspace_iso(pair, p);
    Vector expect(5);
    for (Index j = 0; j < 5; ++j)
      expect[j] = in[static_cast<std::size_t>(j)] ? p.m[j] : (p.is_interior() ? p.m[j] / p.lambda : p.x[j]);
    formula = std::max(formula, (w.w - expect).norm());
    const DncPoint q = dnc_vspace_iso_inverse(pair, w);
    trip = std::max(trip, distance(p, q));
    lambda_ok += q.lambda == p.lambda && w.t == p.lambda;
  }
  o.note << "500 points (" << boundary << " at t=0), max round trip " << g(trip) << ", formula deviation "
         << g(formula) << ", lambda preserved " << lambda_ok << "/500";
  o.require(trip <= 1e-12 && formula <= 1e-12, "round trip");
  o.require(lambda_ok == 500, "lambda changed");
  o.require(boundary > 0, "no t=0 points");
}

void product_and_bundle(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 6);
  const ManifoldPair sa = catalog::sphere_pair(2, 1), ea = catalog::euclidean_pair(3, 1);
  const ManifoldPair prod = product(sa, ea);
  double trip = 0.0;
  int lambda_ok = 0;
  for (int i = 0; i < 200; ++i) {
    const DncPoint q = harness::gen::random_dnc_point(prod, rng, i % 2 == 0);
    const auto [l, r] = dnc_product_split(q, 3);
    validate(sa, l);
    validate(ea, r);
    lambda_ok += l.lambda == q.lambda && r.lambda == q.lambda;
    trip = std::max(trip, distance(dnc_product_join(l, r), q));
  }
  double btrip = 0.0, lin = 0.0, formula = 0.0;
  int blambda = 0;
  for (int i = 0; i < 200; ++i) {
    const double lam = i % 2 ? rng.uniform(0.1, 2.0) : 0.0;
    const Vector m = rng.normal_vector(2), m2 = rng.normal_vector(2);
    const TgElement base = lam != 0.0 ? TgElement::pair(m, m2, lam) : TgElement::tangent(m, m2);
    const BundleFiber f1{rng.normal_vector(2), rng.normal_vector(2)}, f2{rng.normal_vector(2), rng.normal_vector(2)};
    const double a = rng.normal(), b = rng.normal();
    const TgElement e1 = trivial_bundle_join(base, f1), e2 = trivial_bundle_join(base, f2);
    const auto [sb, sf] = trivial_bundle_split(e1, 2);
    btrip = std::max(btrip, distance(trivial_bundle_join(sb, sf), e1));
    blambda += sb.lambda == e1.lambda;
    // Closed form of the fiber: (u, (u - u')/λ) on pairs, (u, w) on tangents.
    const Vector u = e1.x.tail(2), w = lam != 0.0 ? Vector((e1.x.tail(2) - e1.y.tail(2)) / lam) : Vector(e1.y.tail(2));
    formula = std::max({formula, (sf.u - u).norm(), (sf.w - w).norm()});
    TgElement combo = e1;
    combo.x.tail(2) = a * e1.x.tail(2) + b * e2.x.tail(2);
    combo.y.tail(2) = a * e1.y.tail(2) + b * e2.y.tail(2);
    const auto [cb, cf] = trivial_bundle_split(combo, 2);
    lin = std::max({lin, (cf.u - (a * f1.u + b * f2.u)).norm(), (cf.w - (a * f1.w + b * f2.w)).norm(),
                    cb == base ? 0.0 : 1.0});
  }
  o.note << "product: 200 points, max round trip " << g(trip) << ", lambda shared " << lambda_ok
         << "/200; bundle: 200 points, max round trip " << g(btrip) << ", closed-form deviation " << g(formula)
         << ", fiber linearity " << g(lin);
  o.require(trip <= 1e-10 && btrip <= 1e-10 && formula <= 1e-10, "round trip");
  o.require(lambda_ok == 200 && blambda == 200, "lambda");
  o.require(lin <= 1e-10, "fiber linearity");
}

void functoriality(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 7);
  const std::vector<std::pair<PairMap, PairMap>> pairs{
      {fixtures::plane_shear().map, fixtures::plane_quadratic().map},
      {fixtures::sphere_bulge().map, fixtures::sphere_rotation().map},
      {fixtures::plane_quadratic().map, fixtures::plane_taylor().map}};
  double dnc = 0.0, tg = 0.0;
  for (const auto& [f, h] : pairs) {
    const PairMap hf = compose(h, f);
    for (int i = 0; i < 50; ++i) {
      const DncPoint p = harness::gen::random_dnc_point(f.source, rng, i % 2 == 1);
      dnc = std::max(dnc, distance(dnc_map(hf, p), dnc_map(h, dnc_map(f, p))));
    }
  }
  const SmoothMap f = fixtures::plane_quadratic().map.f;
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.normal_vector(2), y = rng.normal_vector(2), z = rng.normal_vector(2);
    const double lam = rng.uniform(0.1, 2.0);
    const TgElement p = TgElement::pair(x, y, lam), q = TgElement::pair(y, z, lam);
    const TgElement u = TgElement::tangent(x, y), v = TgElement::tangent(x, z);
    tg = std::max({tg, distance(tg_map(f, tg_compose(p, q)), tg_compose(tg_map(f, p), tg_map(f, q))),
                   distance(tg_map(f, tg_compose(u, v)), tg_compose(tg_map(f, u), tg_map(f, v))),
                   distance(tg_map(f, tg_inverse(p)), tg_inverse(tg_map(f, p)))});
  }
  o.note << "3 composable pairs x 50 points, max DNC defect " << g(dnc) << "; 50 groupoid pairs, max tg_map defect "
         << g(tg);
  o.require(dnc <= 1e-6, "dnc_map composition");
  o.require(tg <= 1e-6, "tg_map homomorphism");
}

void taylor(Outcome& o) {
  double worst = 10.0, linear = 0.0;
  int n = 0;
  for (const fixtures::PairFixture& f : fixtures::taylor_fixtures()) {
    const fixtures::Probe p = fixtures::default_probe(f);
    const TaylorProbe t = taylor_probe(f.map, f.source_tub, f.target_tub, p.m, p.x, halving_steps(0.5, 10));
    o.require(!t.exact && t.t.size() == 10, f.name + " remainder vanished");
    const double slope = oracle::loglog_slope(t.t, t.remainder);
    o.note << f.name << " slope " << g(slope) << ", ";
    worst = std::min(worst, slope);
    ++n;
  }
  for (const fixtures::PairFixture& f : {fixtures::plane_linear(), fixtures::sphere_rotation()}) {
    const fixtures::Probe p = fixtures::default_probe(f);
    const TaylorProbe t = taylor_probe(f.map, f.source_tub, f.target_tub, p.m, p.x, halving_steps(0.5, 10));
    for (double r : t.remainder) linear = std::max(linear, r);
  }
  o.note << "linear fixtures max r(t) " << g(linear);
  o.require(n >= 3, "fewer than three nonlinear fixtures");
  o.require(worst >= 0.9, "slope below 0.9");
  o.require(linear <= 1e-10, "linear remainder");
}

void block_structure(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 9);
  double worst = 0.0, order = 10.0;
  int exact = 0, points = 0;
  for (const fixtures::PairFixture& f : {fixtures::plane_quadratic(), fixtures::plane_shear(), fixtures::sphere_bulge(),
                                         fixtures::space_to_plane()}) {
    for (int i = 0; i < 20; ++i, ++points) {
      const Vector m = f.map.source.small.sample(rng);
      const Matrix nf = normal_frame(f.map.source, m);
      const Vector x = (nf * rng.normal_vector(nf.cols())).normalized();
      worst = std::max(worst, check_block_structure(f.map, f.source_tub, f.target_tub, m, x).residual);
      const double r1 = check_block_structure(f.map, f.source_tub, f.target_tub, m, x, {.h = 0.02}).residual;
      const double r2 = check_block_structure(f.map, f.source_tub, f.target_tub, m, x, {.h = 0.01}).residual;
      if (r1 < 1e-9) {
        ++exact;
        continue;
      }
      order = std::min(order, std::log2(r1 / r2));
    }
  }
  o.note << points << " points over 4 fixtures, max upper-right residual " << g(worst) << ", min observed order "
         << g(order) << " (" << exact << " points exact at both steps)";
  o.require(worst <= 1e-6, "upper-right residual");
  o.require(order >= 1.9, "order below 1.9");
}

void groupoid_axioms(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 10);
  int ok = 0, zero = 0;
  for (int i = 0; i < 500; ++i) {
    const Vector x = rng.dyadic_vector(3), y = rng.dyadic_vector(3), z = rng.dyadic_vector(3), w = rng.dyadic_vector(3);
    bool good;
    if (i % 2 == 0) {
      const double lam = 0.25 * rng.integer(1, 8) * (rng.integer(0, 1) ? 1.0 : -1.0);
      const TgElement p = TgElement::pair(x, y, lam), q = TgElement::pair(y, z, lam), r = TgElement::pair(z, w, lam);
      good = tg_compose(tg_compose(p, q), r) == tg_compose(p, tg_compose(q, r)) && tg_compose(tg_unit(x, lam), p) == p &&
             tg_compose(p, tg_unit(y, lam)) == p && tg_compose(p, tg_inverse(p)) == tg_unit(x, lam) &&
             tg_compose(tg_inverse(p), p) == tg_unit(y, lam);
    } else {
      ++zero;
      const TgElement u = TgElement::tangent(x, y), v = TgElement::tangent(x, z), s = TgElement::tangent(x, w);
      good = tg_compose(tg_compose(u, v), s) == tg_compose(u, tg_compose(v, s)) && tg_compose(tg_unit(x, 0.0), u) == u &&
             tg_compose(u, tg_unit(x, 0.0)) == u && tg_compose(u, tg_inverse(u)) == tg_unit(x, 0.0) &&
             tg_compose(tg_inverse(u), u) == tg_unit(x, 0.0);
    }
    ok += good;
  }
  o.note << "500 triples (" << zero << " at lambda=0), exact identities " << ok << "/500";
  o.require(ok == 500, "axiom violated");
}

void dnc_membership(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 11);
  std::vector<DncProblem> problems = fixtures::dnc_problems();
  for (const DncProblem& pb : fixtures::groupoid_problems()) problems.push_back(pb);
  int mismatches = 0;
  for (const DncProblem& pb : problems) {
    const std::vector<DncPoint> samples = dnc_samples(pb, rng, 100);
    const DncTransversalityReport rep = dnc_transversality_check(pb, samples, 1e-7);
    // Direct comparison of both memberships at every sample.
    const ManifoldPair pre = preimage(pb.map, pb.z);
    int local = 0;
    for (const DncPoint& p : samples)
      local += dnc_contains(pb.map.target, pb.z, dnc_map(pb.map, p), 1e-7) != dnc_contains(pb.map.source, pre, p, 1e-7);
    mismatches += local;
    o.note << pb.name << " " << rep.members << "/" << rep.samples << " members, " << rep.boundary_checks
           << " boundary; ";
    o.require(rep.passed(), pb.name + ": " + (rep.failures.empty() ? "" : rep.failures.front()));
    o.require(rep.samples == 100 && rep.members > 0, pb.name + " sample count");
  }
  o.note << "membership mismatches " << mismatches;
  o.require(mismatches == 0, "membership differs");
}

void dimension_laws(Outcome& o) {
  Rng rng = Rng::stream(42, "acceptance", 12);
  const DimensionSequence delta({2, 4, 8});
  const Filtration sphere = make_filtration_sphere(standard_flag(delta), 1);
  bool consistent = true;
  auto expect = [&](const std::string& name, const Filtration& f, const std::vector<Index>& want) {
    const std::vector<Index> got = oracle_dims(f, rng, consistent);
    o.note << (o.note.tellp() > 0 ? ", " : "") << name << " " << list(got);
    o.require(got == want, name + " dimensions");
    std::vector<Index> declared;
    for (const ImplicitManifold& m : f.levels) declared.push_back(m.dim);
    o.require(declared == want, name + " declared dimensions");
  };
  expect("sphere", sphere, {1, 3, 7});
  expect("pair groupoid", pair_groupoid_filtration(sphere), {2, 6, 14});
  expect("tangent", tangent_filtration(sphere), {2, 6, 14});
  expect("tangent groupoid", tangent_groupoid_filtration(sphere), {3, 7, 15});
  const Filtration pulled = filtration_from_json(
      Json::parse(R"({"kind":"pullback","p":2,"of":{"kind":"sphere","delta":[2,4,8],"margin":1}})"));
  expect("pullback p=2", pulled, {3, 5, 9});
  const Filtration lin = make_filtration_linear(standard_flag(delta), 2);
  Matrix gm(lin.ambient.ambient_dim, lin.ambient.ambient_dim + 2);
  for (Index j = 0; j < gm.cols(); ++j) gm.col(j) = rng.normal_vector(gm.rows());
  expect("linear pullback p=2", pullback_filtration_fredholm(catalog::euclidean(gm.cols()), SmoothMap::linear(gm), lin),
         {4, 6, 10});
  const Filtration rp = make_filtration_projective(delta, 1);
  const Index d = sphere.ambient.ambient_dim;
  auto lifts = [d](const Vector& q) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(catalog::smat(q, d));
    const Vector x = es.eigenvectors().col(d - 1);
    return std::vector<Vector>{x, Vector(-x)};
  };
  expect("projective", rp, {1, 3, 7});
  expect("covering pullback",
         pullback_filtration_covering(catalog::sphere(d - 1, d), catalog::double_cover(d - 1, d - 1), lifts, rp),
         {1, 3, 7});
  o.require(consistent, "rank varies across samples");
}

void negative_fixtures(Outcome& o) {
  const Filtration triv =
      make_filtration_with_trivial_factor(make_filtration_linear(standard_flag(DimensionSequence({1, 2})), 2), 2);
  const ConditionReport r = verify_filtration(triv, {.samples = 32});
  o.note << "trivial factor: density " << to_string(r.status_of("density")) << ", fredholm "
         << r.find("fredholm")->evidence << "; ";
  o.require(r.status_of("density") == Status::fail, "trivial factor reported dense");
  o.require(r.find("fredholm")->evidence == "not claimed", "trivial factor claims Fredholm data");
  const Filtration mixed = make_filtration_product(make_filtration_sphere(standard_flag(DimensionSequence({2, 4})), 0),
                                                   make_filtration_projective(DimensionSequence({2, 4}), 1));
  const ConditionReport m = verify_filtration(mixed, {.samples = 16});
  o.note << "witness-free product: normality " << to_string(m.status_of("d")) << "; ";
  o.require(m.status_of("d") == Status::unverified, "normality not unverified");
  Matrix collapse = Matrix::Identity(4, 4);
  collapse(1, 1) = 0.0;
  bool raised = false;
  try {
    pullback_filtration_fredholm(catalog::euclidean(4), SmoothMap::linear(collapse),
                                 make_filtration_linear(standard_flag(DimensionSequence({1, 2, 3})), 1));
  } catch (const NotTransverse&) {
    raised = true;
  }
  o.note << "rank-deficient pullback raises NotTransverse: " << (raised ? "yes" : "no");
  o.require(raised, "NotTransverse not raised");
}

std::pair<int, std::string> capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void end_to_end(Outcome& o, const std::string& cli) {
  std::string a, b;
  bool passed = true;
  if (!cli.empty()) {
    const auto [ca, oa] = capture("'" + cli + "' verify-all 2>/dev/null");
    const auto [cb, ob] = capture("'" + cli + "' verify-all 2>/dev/null");
    passed = ca == 0 && cb == 0;
    a = oa;
    b = ob;
    o.note << "CLI verify-all exit codes " << ca << "," << cb;
  } else {
    const harness::AggregateReport ra = harness::run_all(harness::SuiteConfig{});
    const harness::AggregateReport rb = harness::run_all(harness::SuiteConfig{});
    passed = ra.passed() && rb.passed();
    a = to_json(ra).dump(2);
    b = to_json(rb).dump(2);
    o.note << "in-process verify-all " << (passed ? "pass" : "fail");
  }
  const Json j = Json::parse(a, nullptr, false);
  const bool overall = !j.is_discarded() && j.value("overall", "") == "pass";
  o.note << ", " << (j.is_discarded() ? 0 : j["suites"].size()) << " suites, overall "
         << (overall ? "pass" : "fail") << ", reports " << (a == b ? "byte-identical" : "DIFFER") << " ("
         << a.size() << " bytes)";
  o.require(passed && overall, "verify-all failed");
  o.require(a == b && !a.empty(), "reports differ");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria{
      {1, "block index zero", 5, block_index_zero},
      {2, "retraction of GL~_K", 5, retraction},
      {3, "block transversality", 10, block_transversality},
      {4, "composition-transversality law", 5, composition_law},
      {5, "DNC vector-space isomorphism", 2, vspace_iso},
      {6, "product and trivial-bundle isomorphisms", 5, product_and_bundle},
      {7, "functoriality", 10, functoriality},
      {8, "Taylor remainder", 5, taylor},
      {9, "normal-bundle block structure", 5, block_structure},
      {10, "groupoid axioms", 2, groupoid_axioms},
      {11, "DNC transversality membership", 10, dnc_membership},
      {12, "filtration dimension laws", 15, dimension_laws},
      {13, "negative fixtures", 5, negative_fixtures},
      {14, "end-to-end verify-all", 60, [&cli](Outcome& o) { end_to_end(o, cli); }},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = s < c.limit_s;
    const bool ok = o.ok && in_time;
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << std::setw(2) << c.id << "] " << c.title << ": " << o.note.str()
              << " (" << std::fixed << std::setprecision(2) << s << " s, limit " << std::setprecision(0) << c.limit_s
              << " s" << (in_time ? "" : ", TIME EXCEEDED") << ")" << std::defaultfloat << std::endl;
  }
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << criteria.size() - static_cast<std::size_t>(failed)
            << "/" << criteria.size() << " criteria" << std::endl;
  return failed ? 1 : 0;
}
