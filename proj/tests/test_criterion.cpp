#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "metriclab/criterion.hpp"
#include "metriclab/heat.hpp"
#include "metriclab/quadrature.hpp"
#include "support.hpp"

#include <cmath>
#include <string>

using namespace metriclab;
using namespace testsup;

namespace {

// int_0^inf 2 sinh(A e^{-(r/w)^2}) 2 pi r dr = 2 pi w^2 * series(A); the odd
// sinh expansion integrates term by term against the planar measure.
double sinh_gauss_series(double A) {
    double sum = 0.0, fact = 1.0;
    for (int k = 0; k <= 12; ++k) {
        const int n = 2 * k + 1;
        if (k > 0) fact *= double(n - 1) * double(n);
        sum += std::pow(A, n) / (double(n) * fact);
    }
    return sum;
}

// int_0^inf sinh(e^{-r}) r dr = sum_k 1 / ((2k+1)^2 (2k+1)!).
double sinh_exp_series() {
    double sum = 0.0, fact = 1.0;
    for (int k = 0; k <= 12; ++k) {
        const int n = 2 * k + 1;
        if (k > 0) fact *= double(n - 1) * double(n);
        sum += 1.0 / (double(n) * double(n) * fact);
    }
    return sum;
}

bool contains(const std::string& hay, const char* needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("profile families: values, derivatives, envelopes") {
    const ConformalProfile g = gaussian_profile(0.7, 1.3);
    const ConformalProfile e = exponential_profile(-0.4, 2.0);
    const ConformalProfile c = compact_profile(0.5, 2.5);
    const ConformalProfile l = linear_profile(0.3);

    // finite differences validate the hand derivatives away from kinks
    const double h = 1e-6;
    for (const ConformalProfile* p : {&g, &e, &c, &l}) {
        for (double r : {0.3, 0.9, 1.7, 2.2}) {
            const double fd1 = (p->phi(r + h) - p->phi(r - h)) / (2.0 * h);
            const double fd2 = (p->phi(r + h) - 2.0 * p->phi(r) + p->phi(r - h)) / (h * h);
            CHECK(std::abs(p->dphi(r) - fd1) < 1e-8);
            CHECK(std::abs(p->d2phi(r) - fd2) < 1e-3);
        }
    }

    CHECK(g.deviation(0.0) == doctest::Approx(2.0 * std::sinh(0.7)).epsilon(1e-14));
    CHECK(e.deviation(1.0) == doctest::Approx(2.0 * std::sinh(0.4 * std::exp(-2.0))).epsilon(1e-14));
    CHECK(g.sup_abs() == 0.7);
    CHECK(e.sup_abs() == 0.4);
    CHECK(c.sup_abs() == 0.5);
    CHECK(std::isinf(l.sup_abs()));
    CHECK(c.compactly_supported());
    CHECK(c.phi(2.5) == 0.0);
    CHECK(c.phi(3.0) == 0.0);
    CHECK(!g.compactly_supported());
    CHECK(zero_profile().support_radius() == 0.0);

    CHECK_THROWS_AS((void)gaussian_profile(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)exponential_profile(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)compact_profile(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("identical metrics give a zero, satisfied criterion on every base") {
    for (const RadialManifold& man :
         {euclidean_model(3), hyperbolic_model(2), sphere_cap_model(4), poly_exp_model(2, 0.5, 1.0)}) {
        const ConformalPair pair{man, zero_profile()};
        for (MetricSide j : {MetricSide::G, MetricSide::H}) {
            const CriterionReport tm = theorem_main_integral(pair, 1.0, j);
            CHECK(tm.value == 0.0);
            CHECK(tm.verdict == Verdict::Satisfied);
            CHECK(!tm.infinite);
            CHECK(tm.truncation_error == 0.0);
            const CriterionReport cl = corollary_lower_integral(pair, j);
            CHECK(cl.value == 0.0);
            CHECK(cl.verdict == Verdict::Satisfied);
        }
    }
}

TEST_CASE("flat gaussian deviation: series oracle for the main integral") {
    const double A = 0.8, w = 1.0, s = 1.0;
    const ConformalPair pair{euclidean_model(2), gaussian_profile(A, w)};
    const CriterionReport rep = theorem_main_integral(pair, s, MetricSide::G);

    const double C = 5.0 * pi_sq();
    const double rate = C / -std::expm1(-C);
    const double sup = 1.0 / (4.0 * pi() * s);
    const double expect = rate * sup * 2.0 * pi() * w * w * sinh_gauss_series(A);

    CHECK(rep.verdict == Verdict::Satisfied);
    CHECK(rep.value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(rep.truncation_error < 1e-10);
    CHECK(rep.truncation_error >= 0.0);
    CHECK(contains(rep.inputs_digest, "rate=closed-form"));
    CHECK(contains(rep.inputs_digest, "sup=closed-form"));
    CHECK(rep.caveat.empty());
}

TEST_CASE("flat gaussian deviation: perturbed side is certified and finite") {
    const ConformalPair pair{euclidean_model(2), gaussian_profile(0.8, 1.0)};
    const CriterionReport rep = theorem_main_integral(pair, 1.0, MetricSide::H);
    CHECK(rep.verdict == Verdict::Satisfied);
    CHECK(rep.value > 0.0);
    CHECK(rep.truncation_error < 1e-8);
    CHECK(contains(rep.inputs_digest, "route=conformal-2d"));
    CHECK(contains(rep.inputs_digest, "rate=sampled-infimum"));
    CHECK(contains(rep.inputs_digest, "sup=configured"));
    CHECK(std::isfinite(rep.value));
    // the tail certificate is small relative to the (large, configured-weight)
    // value: the verdict rests on the majorant, not on the constant's size
    CHECK(rep.truncation_error < 1e-8 * rep.value);

    // the perturbed curvature dips negative, so the configured weight exceeds
    // the flat closed-form one
    const CriterionReport repg = theorem_main_integral(pair, 1.0, MetricSide::G);
    CHECK(rep.value > repg.value);
}

TEST_CASE("constant factor: both sides diverge and scale exactly") {
    const ConformalPair pair{euclidean_model(2), constant_profile(1.0)};
    const CriterionReport g = theorem_main_integral(pair, 0.5, MetricSide::G);
    const CriterionReport h = theorem_main_integral(pair, 0.5, MetricSide::H);

    CHECK(g.verdict == Verdict::Diverged);
    CHECK(g.infinite);
    CHECK(contains(g.caveat, "inconclusive for spectra"));
    CHECK(contains(g.tail_model, "integrand >="));
    CHECK(h.verdict == Verdict::Diverged);
    CHECK(contains(h.inputs_digest, "route=scaled-model"));

    // flat scale invariance: the scaled metric has the same rate and diagonal
    // kernel, so the partial values differ exactly by the density e^{-2 phi}
    CHECK(h.value / g.value == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("scaled hyperbolic model: closed-form perturbed weight matches by hand") {
    const double A = 0.3, s = 0.7;
    const ConformalPair pair{hyperbolic_model(3), constant_profile(A)};
    const CriterionReport rep = theorem_main_integral(pair, s, MetricSide::H);

    const double c2 = std::exp(-4.0 * A / 3.0);
    const double weight = local_bounds_from_ricci(3, -2.0 / c2).rate_at(s) *
                          std::pow(c2, -1.5) * hyperbolic3_kernel(s / c2, 0.0);
    const double R = 12.0;
    const double volint = 0.5 * (std::sinh(R) * std::cosh(R) - R);
    const double expect = weight * 2.0 * std::sinh(A) * std::exp(-2.0 * A) * 4.0 * pi() * volint;

    CHECK(rep.verdict == Verdict::Diverged);
    CHECK(rep.value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("flat gaussian: inverse-ball integral hits the series oracle") {
    const double A = 0.5, w = 1.2;
    const ConformalPair pair{euclidean_model(2), gaussian_profile(A, w)};
    const CriterionReport rep = corollary_lower_integral(pair, MetricSide::G);
    // weight 1/pi cancels the measure constant: value = 2 w^2 series(A)
    const double expect = 2.0 * w * w * sinh_gauss_series(A);
    CHECK(rep.verdict == Verdict::Satisfied);
    CHECK(rep.value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(contains(rep.inputs_digest, "ball=closed-homogeneous"));
}

TEST_CASE("hyperbolic slow decay: certified divergence on both sides") {
    const ConformalPair pair{hyperbolic_model(2), exponential_profile(1.0, 1.0)};
    const CriterionReport g = corollary_lower_integral(pair, MetricSide::G);
    CHECK(g.verdict == Verdict::Diverged);
    CHECK(g.infinite);
    CHECK(g.value > 0.0);
    CHECK(contains(g.tail_model, "integrand >="));
    CHECK(contains(g.caveat, "inconclusive for spectra"));

    const CriterionReport h = corollary_lower_integral(pair, MetricSide::H);
    CHECK(h.verdict == Verdict::Diverged);
    CHECK(contains(h.inputs_digest, "conformal-sandwich"));

    // fast decay flips the verdict: rate 3 beats volume growth rate 1
    const ConformalPair fast{hyperbolic_model(2), exponential_profile(1.0, 3.0)};
    const CriterionReport gf = corollary_lower_integral(fast, MetricSide::G);
    CHECK(gf.verdict == Verdict::Satisfied);
    CHECK(gf.truncation_error > 0.0);
    CHECK(gf.truncation_error < 1e-10);
}

TEST_CASE("compact support: zero tail and an independent quadrature cross-check") {
    const double A = 0.6, r0 = 2.0;
    const RadialManifold man = euclidean_model(3);
    const ConformalPair pair{man, compact_profile(A, r0)};
    const CriterionReport rep = corollary_lower_integral(pair, MetricSide::G);
    CHECK(rep.verdict == Verdict::Satisfied);
    CHECK(rep.truncation_error == 0.0);
    CHECK(contains(rep.tail_model, "compactly supported"));

    // composite-midpoint oracle, method independent of the adaptive engine
    const double weight = 1.0 / ball_volume(man, 1.0);
    const int n = 400000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) * r0 / n;
        const double x = r / r0;
        const double phi = A * (1.0 - x * x) * (1.0 - x * x);
        acc += 2.0 * std::sinh(phi) * 4.0 * pi() * r * r;
    }
    acc *= weight * r0 / n;
    CHECK(rep.value == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("value grows with the conformal amplitude") {
    const RadialManifold man = euclidean_model(2);
    double prev_tm = 0.0, prev_cl = 0.0;
    for (double A : {0.2, 0.4, 0.8, 1.2}) {
        const ConformalPair pair{man, gaussian_profile(A, 1.0)};
        const CriterionReport tm = theorem_main_integral(pair, 1.0, MetricSide::G);
        const CriterionReport cl = corollary_lower_integral(pair, MetricSide::G);
        CHECK(tm.value > prev_tm);
        CHECK(cl.value > prev_cl);
        prev_tm = tm.value;
        prev_cl = cl.value;
    }
}

TEST_CASE("transfer check: certified fixtures agree, unbounded factor is gated") {
    const TransferReport flat =
        quasi_isometry_transfer_check({euclidean_model(2), gaussian_profile(0.8, 1.0)});
    CHECK(flat.certified);
    CHECK(flat.agree);
    CHECK(flat.side_g.verdict == Verdict::Satisfied);
    CHECK(flat.side_h.verdict == Verdict::Satisfied);

    const TransferReport hyp =
        quasi_isometry_transfer_check({hyperbolic_model(2), exponential_profile(1.0, 1.0)});
    CHECK(hyp.certified);
    CHECK(hyp.agree);
    CHECK(hyp.side_g.verdict == Verdict::Diverged);

    const TransferReport lin =
        quasi_isometry_transfer_check({euclidean_model(2), linear_profile(0.2)});
    CHECK(!lin.certified);
    CHECK(!lin.agree);
    CHECK(contains(lin.notice, "skipped"));
}

TEST_CASE("non-homogeneous base: pole caveats and capped verdicts") {
    const RadialManifold pe = poly_exp_model(2, 0.4, 1.0);
    const CriterionReport tm =
        theorem_main_integral({pe, gaussian_profile(0.5, 1.0)}, 1.0, MetricSide::G);
    CHECK(tm.verdict == Verdict::Inconclusive);
    CHECK(contains(tm.caveat, "pole-centered"));
    CHECK(contains(tm.tail_model, "no certified tail model"));

    const CriterionReport cm =
        theorem_main_integral({pe, compact_profile(0.5, 2.0)}, 1.0, MetricSide::G);
    CHECK(cm.verdict == Verdict::Satisfied);
    CHECK(contains(cm.caveat, "pole-centered"));
    CHECK(cm.truncation_error == 0.0);

    const CriterionReport cl =
        corollary_lower_integral({pe, gaussian_profile(0.5, 1.0)}, MetricSide::G);
    CHECK(cl.verdict == Verdict::Inconclusive);
}

TEST_CASE("sphere cap: proper integrals on the compact domain") {
    const RadialManifold cap = sphere_cap_model(2);
    const ConformalPair pair{cap, gaussian_profile(0.4, 1.0)};
    const CriterionReport g = theorem_main_integral(pair, 1.0, MetricSide::G);
    CHECK(g.verdict == Verdict::Satisfied);
    CHECK(contains(g.tail_model, "compact domain"));
    CHECK(g.truncation_radius == doctest::Approx(pi() - 0.1).epsilon(1e-15));

    const CriterionReport h = theorem_main_integral(pair, 1.0, MetricSide::H);
    CHECK(h.verdict == Verdict::Satisfied);
    CHECK(contains(h.caveat, "truncated cap"));

    const CriterionReport cl = corollary_lower_integral(pair, MetricSide::G);
    CHECK(cl.verdict == Verdict::Satisfied);
    CHECK(contains(cl.caveat, "pole-centered"));
}

TEST_CASE("rejections: missing provenance and bad arguments") {
    const ConformalPair flat3{euclidean_model(3), gaussian_profile(0.5, 1.0)};
    CHECK_THROWS_AS((void)theorem_main_integral(flat3, 1.0, MetricSide::H),
                    std::invalid_argument);
    const ConformalPair pe{poly_exp_model(2, 0.4, 1.0), gaussian_profile(0.5, 1.0)};
    CHECK_THROWS_AS((void)theorem_main_integral(pe, 1.0, MetricSide::H), std::invalid_argument);
    const ConformalPair lin{euclidean_model(2), linear_profile(0.2)};
    CHECK_THROWS_AS((void)theorem_main_integral(lin, 1.0, MetricSide::H), std::invalid_argument);
    CHECK_THROWS_AS((void)corollary_lower_integral(lin, MetricSide::H), std::invalid_argument);
    CHECK_THROWS_AS((void)theorem_main_integral(flat3, 0.0, MetricSide::G),
                    std::invalid_argument);

    // unbounded factor on the g side still works: the weight needs no phi
    const CriterionReport lg = theorem_main_integral(lin, 1.0, MetricSide::G);
    CHECK(lg.verdict == Verdict::Diverged);
}

TEST_CASE("flow criterion: zero field, certified decay, constant divergence") {
    FlowCriterionInput zero{euclidean_model(2), zero_profile(), 0.0, true, -2.0, 1.0};
    const CriterionReport z = flow_integral(zero);
    CHECK(z.value == 0.0);
    CHECK(z.verdict == Verdict::Satisfied);

    // decaying envelope on the plane: coeff = (m/4) S |kappa| = 1 and the
    // series oracle gives 2 sum 1/((2k+1)^2 (2k+1)!)
    FlowCriterionInput dec{euclidean_model(2), exponential_profile(1.0, 1.0), 1.0, true, -2.0,
                           1.0};
    const CriterionReport d = flow_integral(dec);
    CHECK(d.verdict == Verdict::Satisfied);
    // the full-line series exceeds the truncated value by exactly the tail,
    // which the certified majorant must cover
    const double full = 2.0 * sinh_exp_series();
    CHECK(d.value <= full + 1e-12);
    CHECK(full - d.value <= d.truncation_error * (1.0 + 1e-9) + 1e-12);
    CHECK(d.truncation_error < 1e-3);

    // Einstein-like constant envelope on infinite volume diverges, with the
    // sufficiency caveat spelled out
    FlowCriterionInput con{hyperbolic_model(2), constant_profile(1.0), 1.0, true, -2.0, 1.0};
    const CriterionReport c = flow_integral(con);
    CHECK(c.verdict == Verdict::Diverged);
    CHECK(c.infinite);
    CHECK(contains(c.caveat, "inconclusive for spectra"));

    FlowCriterionInput uncert = con;
    uncert.sup_certified = false;
    CHECK_THROWS_AS((void)flow_integral(uncert), std::invalid_argument);
    FlowCriterionInput neg = con;
    neg.a_field = constant_profile(-1.0);
    CHECK_THROWS_AS((void)flow_integral(neg), std::invalid_argument);
    FlowCriterionInput low = con;
    low.sup_a = 0.5;
    CHECK_THROWS_AS((void)flow_integral(low), std::invalid_argument);
    FlowCriterionInput lin = con;
    lin.a_field = linear_profile(0.5);
    lin.sup_a = 10.0;
    CHECK_THROWS_AS((void)flow_integral(lin), std::invalid_argument);
}

TEST_CASE("reports are deterministic") {
    const ConformalPair pair{hyperbolic_model(2), gaussian_profile(0.6, 1.1)};
    const CriterionReport a = theorem_main_integral(pair, 0.5, MetricSide::G);
    const CriterionReport b = theorem_main_integral(pair, 0.5, MetricSide::G);
    CHECK(a.value == b.value);
    CHECK(a.truncation_error == b.truncation_error);
    CHECK(a.inputs_digest == b.inputs_digest);
    CHECK(a.tail_model == b.tail_model);
}
