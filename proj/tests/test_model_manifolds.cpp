// Radial model manifolds: curvature closed forms, curvature-rate bounds with
// their frozen constants, and pole-centered ball volumes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "metriclab/quadrature.hpp"
#include "metriclab/radial_manifold.hpp"
#include "support.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace metriclab;
using namespace testsup;

TEST_CASE("constant-curvature ricci closed forms") {
    for (int m = 2; m <= 5; ++m) {
        for (double r : {0.0, 0.3, 1.0, 2.5}) {
            const RicciEigs eu = ricci_quadratic_form(euclidean_model(m), r);
            CHECK(std::abs(eu.radial) < TIGHT);
            CHECK(std::abs(eu.tangential) < TIGHT);

            const RicciEigs hy = ricci_quadratic_form(hyperbolic_model(m), r);
            CHECK(std::abs(hy.radial + double(m - 1)) < 1e-9);
            CHECK(std::abs(hy.tangential + double(m - 1)) < 1e-9);
            CHECK(std::abs(hy.min() + double(m - 1)) < 1e-9);

            if (r < 3.0) {  // inside the sphere-cap domain
                const RicciEigs sp = ricci_quadratic_form(sphere_cap_model(m), r);
                CHECK(std::abs(sp.radial - double(m - 1)) < 1e-9);
                CHECK(std::abs(sp.tangential - double(m - 1)) < 1e-9);
            }
        }
        CHECK(euclidean_model(m).constant_curvature());
        CHECK(hyperbolic_model(m).constant_curvature());
        CHECK(sphere_cap_model(m).constant_curvature());
        CHECK_FALSE(poly_exp_model(m, 0.5, 1.0).constant_curvature());
    }
}

TEST_CASE("poly-exp warp: derivative consistency and pole curvature") {
    const double a = 0.7, b = 1.3;
    const RadialWarp w{WarpKind::PolyExp, a, b};
    // d1 and d2 against central differences of the closed-form value.
    const double h = 1e-5;
    for (double r : {0.2, 0.7, 1.1, 2.0, 3.5}) {
        const double fd1 = (w.value(r + h) - w.value(r - h)) / (2 * h);
        const double fd2 = (w.value(r + h) - 2 * w.value(r) + w.value(r - h)) / (h * h);
        CHECK(std::abs(w.d1(r) - fd1) < 1e-7 * (1 + std::abs(fd1)));
        CHECK(std::abs(w.d2(r) - fd2) < 1e-4 * (1 + std::abs(fd2)));
    }
    // Near the pole f = r + a r^3 / b^2 + O(r^5), so both Ricci eigenvalues
    // approach -6 a (m-1) / b^2; smoothness forces radial = tangential there.
    for (int m : {2, 3, 4}) {
        const RadialManifold man = poly_exp_model(m, a, b);
        const RicciEigs at_pole = ricci_quadratic_form(man, 0.0);
        const double want = -6.0 * a * (m - 1) / (b * b);
        CHECK(std::abs(at_pole.radial - want) < 1e-6 * std::abs(want));
        CHECK(std::abs(at_pole.tangential - want) < 1e-6 * std::abs(want));
        // Far field: the warp is asymptotically linear, so the radial part
        // vanishes and the tangential part decays like (e^{2a}-1)/r^2.
        const RicciEigs far = ricci_quadratic_form(man, 25.0);
        CHECK(std::abs(far.radial) < 1e-8);
        CHECK(std::abs(far.tangential) < (m - 2) * 1.5e-3 + 1e-8);
    }
}

TEST_CASE("warp over r envelopes") {
    for (int m : {2, 3}) {
        CHECK(euclidean_model(m).warp_over_r_sup() == 1.0);
        CHECK(euclidean_model(m).warp_over_r_inf() == 1.0);
        const double a = 0.4, b = 0.9;
        const RadialManifold up = poly_exp_model(m, a, b);
        CHECK(std::abs(up.warp_over_r_sup() - std::exp(a)) < TIGHT);
        CHECK(std::abs(up.warp_over_r_inf() - 1.0) < TIGHT);
        const RadialManifold down = poly_exp_model(m, -a, b);
        CHECK(std::abs(down.warp_over_r_sup() - 1.0) < TIGHT);
        CHECK(std::abs(down.warp_over_r_inf() - std::exp(-a)) < TIGHT);
        // The envelopes really do sandwich f(r)/r on a sweep.
        for (double r = 0.05; r < 6.0; r += 0.05) {
            const double q = up.warp.value(r) / r;
            CHECK(q <= up.warp_over_r_sup() + TIGHT);
            CHECK(q >= up.warp_over_r_inf() - TIGHT);
        }
        CHECK_THROWS_AS(hyperbolic_model(m).warp_over_r_sup(), std::invalid_argument);
    }
}

TEST_CASE("curvature-rate bounds: frozen constants") {
    // Flat model, m = 2: ricci_neg = 0 and rate_const = 5 pi^2.
    const LocalBounds flat2 = local_bounds(euclidean_model(2), 1.0);
    CHECK(flat2.ricci_neg == 0.0);
    CHECK(std::abs(flat2.rate_const - 49.348022005446790) < 1e-12);
    CHECK(flat2.provenance == Provenance::ClosedForm);

    // Curvature -1, m = 2: ricci_neg = 1, rate_const = 5 pi^2 + pi + 4.
    const LocalBounds hyp2 = local_bounds(hyperbolic_model(2), 0.3);
    CHECK(std::abs(hyp2.ricci_neg - 1.0) < TIGHT);
    CHECK(std::abs(hyp2.rate_const - 56.489614659036584) < 1e-12);

    // Curvature -1, m = 3: ricci_neg = 2, rate_const = 6 pi^2 + 2 pi + 8.
    const LocalBounds hyp3 = local_bounds(hyperbolic_model(3), 2.0);
    CHECK(std::abs(hyp3.ricci_neg - 2.0) < TIGHT);
    CHECK(std::abs(hyp3.rate_const - 73.500811713716171) < 1e-12);

    // Positive curvature clamps at zero: same constant as the flat model.
    const LocalBounds cap3 = local_bounds(sphere_cap_model(3), 0.5);
    CHECK(cap3.ricci_neg == 0.0);
    CHECK(std::abs(cap3.rate_const - (pi_sq() * 6.0)) < 1e-12);
}

TEST_CASE("curvature-rate bounds: explicit-K route agrees") {
    for (int m : {2, 3, 4}) {
        const LocalBounds a = local_bounds(hyperbolic_model(m), 1.0);
        const LocalBounds b = local_bounds_from_ricci(m, -double(m - 1));
        CHECK(std::abs(a.ricci_neg - b.ricci_neg) < TIGHT);
        CHECK(std::abs(a.rate_const - b.rate_const) < TIGHT);
        CHECK(b.provenance == Provenance::Configured);
    }
    // K > 0 is clamped: the rate depends only on the negative part.
    CHECK(local_bounds_from_ricci(3, 2.0).ricci_neg == 0.0);
    CHECK(std::abs(local_bounds_from_ricci(3, 2.0).rate_const -
                   local_bounds_from_ricci(3, 0.0).rate_const) < TIGHT);
}

TEST_CASE("sampled bounds are conservative for the variable-curvature family") {
    const RadialManifold man = poly_exp_model(3, -0.6, 1.1);  // mixed-sign curvature
    for (double x_r : {0.0, 0.4, 1.0, 1.7, 2.5}) {
        const LocalBounds lb = local_bounds(man, x_r);
        CHECK(lb.provenance == Provenance::Sampled);
        // ricci_neg dominates (-min Ricci)_+ at radii within the half ball.
        const double lo = x_r > 0.5 ? x_r - 0.5 : 0.0;
        for (double r = lo; r <= x_r + 0.5; r += 0.01) {
            const double neg = std::max(0.0, -ricci_quadratic_form(man, r).min());
            CHECK(lb.ricci_neg >= neg - 1e-9);
        }
        CHECK(lb.rate_const >= pi_sq() * 6.0 - TIGHT);
    }
}

TEST_CASE("time-dependent rate: limits and monotonicity") {
    LocalBounds lb;
    lb.rate_const = 2.0;
    // Frozen value of 2 / (1 - e^{-1}) at s = 1/2.
    CHECK(std::abs(lb.rate_at(0.5) - 3.1639534137386528) < 1e-13);
    // s -> infinity recovers the constant; s -> 0 behaves like 1/s.
    CHECK(std::abs(lb.rate_at(50.0) - 2.0) < 1e-12);
    CHECK(std::abs(1e-9 * lb.rate_at(1e-9) - 1.0) < 1e-8);
    double prev = lb.rate_at(0.01);
    for (double s = 0.02; s < 3.0; s += 0.01) {
        const double cur = lb.rate_at(s);
        CHECK(cur < prev);
        CHECK(cur > lb.rate_const);
        prev = cur;
    }
    CHECK_THROWS_AS(lb.rate_at(0.0), std::invalid_argument);
}

TEST_CASE("sphere areas and ball volumes") {
    CHECK(std::abs(unit_sphere_area(2) - 2 * pi()) < TIGHT);
    CHECK(std::abs(unit_sphere_area(3) - 4 * pi()) < TIGHT);
    CHECK(std::abs(unit_sphere_area(4) - 2 * pi() * pi()) < TIGHT);

    // Flat balls: pi r^2 and (4/3) pi r^3.
    CHECK(std::abs(ball_volume(euclidean_model(2), 1.0) - pi()) < 1e-10);
    CHECK(std::abs(ball_volume(euclidean_model(3), 2.0) - 4.0 / 3.0 * pi() * 8.0) < 1e-9);

    // Curvature -1: 2 pi (cosh r - 1) in dimension 2,
    // 2 pi (sinh r cosh r - r) in dimension 3.
    CHECK(std::abs(ball_volume(hyperbolic_model(2), 1.0) - 2 * pi() * (std::cosh(1.0) - 1.0)) <
          1e-10);
    CHECK(std::abs(ball_volume(hyperbolic_model(3), 1.0) -
                   2 * pi() * (std::sinh(1.0) * std::cosh(1.0) - 1.0)) < 1e-9);

    // Curvature +1, dimension 2: 2 pi (1 - cos r) inside the cap.
    CHECK(std::abs(ball_volume(sphere_cap_model(2), 2.5) - 2 * pi() * (1.0 - std::cos(2.5))) <
          1e-10);

    // Monotone in r; expanding warps dominate the flat ball.
    double prev = 0.0;
    const RadialManifold pe = poly_exp_model(3, 0.5, 1.0);
    for (double r = 0.25; r <= 3.0; r += 0.25) {
        const double v = ball_volume(pe, r);
        CHECK(v > prev);
        CHECK(v >= ball_volume(euclidean_model(3), r) - 1e-12);
        prev = v;
    }
    CHECK_THROWS_AS(ball_volume(sphere_cap_model(2), 3.2), std::invalid_argument);
}

TEST_CASE("volume measure weight matches the warp power") {
    const RadialManifold man = hyperbolic_model(4);
    for (double r : {0.1, 0.8, 2.0}) {
        CHECK(std::abs(volume_measure_weight(man, r) - std::pow(std::sinh(r), 3)) <
              1e-12 * std::pow(std::sinh(r), 3) + 1e-15);
    }
    // Ball volume is exactly the area-weighted radial integral of the weight.
    const double direct = unit_sphere_area(4) *
                          integrate([&](double r) { return volume_measure_weight(man, r); }, 0.0,
                                    1.5, 1e-13);
    CHECK(std::abs(ball_volume(man, 1.5) - direct) < 1e-10);
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(RadialManifold(1, RadialWarp{}), std::invalid_argument);
    CHECK_THROWS_AS(poly_exp_model(2, 0.3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ricci_quadratic_form(sphere_cap_model(2), 3.1), std::invalid_argument);
    CHECK_THROWS_AS(ricci_quadratic_form(euclidean_model(2), -0.1), std::invalid_argument);
    CHECK(provenance_name(Provenance::ClosedForm) == std::string("closed-form"));
    CHECK(provenance_name(Provenance::Sampled) == std::string("sampled-infimum"));
    CHECK(provenance_name(Provenance::Configured) == std::string("configured"));
}
