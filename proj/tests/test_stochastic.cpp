// Sampler and gradient estimator: chart algebra, transport and damped
// transport against Einstein closed forms, the intrinsic-drift moment
// identity, and the derivative estimator against independent oracles.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "metriclab/bismut.hpp"
#include "metriclab/chart.hpp"
#include "metriclab/heat.hpp"
#include "metriclab/quadrature.hpp"
#include "support.hpp"

#include <cmath>
#include <stdexcept>

using namespace metriclab;
using namespace testsup;

namespace {

Eigen::Vector2d vec2(double a, double b) { return Eigen::Vector2d(a, b); }

// Offset Gaussian fixture on the flat chart: closed-form semigroup.
const double kFlatExact = 0.19470019576785122;  // (1/4) e^{-1/4} at s = 1/2
double flat_gauss(const Eigen::VectorXd& y) {
    return std::exp(-0.5 * (y - vec2(1.0, 0.0)).squaredNorm());
}

}  // namespace

TEST_CASE("conformal chart algebra") {
    const ConformalChart eu = euclidean_chart(2);
    CHECK(eu.psi(vec2(0.4, -0.2)) == 0.0);
    CHECK(eu.drift(vec2(0.4, -0.2)).norm() == 0.0);
    CHECK(eu.metric(vec2(0.1, 0.1)).isIdentity(1e-15));
    CHECK(std::abs(eu.distance(vec2(0, 0), vec2(3, 4)) - 5.0) < TIGHT);

    for (int m : {2, 3}) {
        const ConformalChart hy = poincare_ball_chart(m);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
        x(0) = 0.3;
        const double lam = 2.0 / (1.0 - 0.09);
        CHECK(std::abs(std::exp(hy.psi(x)) - lam) < TIGHT * lam);
        CHECK(std::abs(hy.metric(x)(0, 0) - lam * lam) < 1e-12 * lam * lam);
        CHECK(std::abs(hy.sigma_hat(x)(1, 1) - 1.0 / lam) < TIGHT);
        // Intrinsic drift (m-2)(1-|x|^2) x / 2.
        const Eigen::VectorXd want = (m - 2) * (1.0 - 0.09) / 2.0 * x;
        CHECK((hy.drift(x) - want).norm() < TIGHT);
        CHECK(std::abs(hy.ric_iso(x) + (m - 1.0)) < TIGHT);
        // Distance from the origin is 2 artanh |x|.
        const Eigen::VectorXd o = Eigen::VectorXd::Zero(m);
        CHECK(std::abs(hy.distance(o, x) - 2.0 * std::atanh(0.3)) < 1e-12);
        CHECK(std::abs(hy.distance(x, o) - hy.distance(o, x)) < TIGHT);
        CHECK(hy.in_domain(x));
        Eigen::VectorXd far = Eigen::VectorXd::Zero(m);
        far(0) = 0.999;
        CHECK_FALSE(hy.in_domain(far));
    }
    CHECK_THROWS_AS(poincare_ball_chart(2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(euclidean_chart(1), std::invalid_argument);
}

TEST_CASE("flat chart: transport is trivial and the frame is exact") {
    const ConformalChart chart = euclidean_chart(2);
    BismutOptions opts;
    opts.dt = 1e-3;
    opts.seed = 11;
    const PathBatch b = simulate_batch(chart, vec2(0, 0), flat_gauss, 0.1, 50, opts);
    CHECK(b.frame_residual == 0.0);
    CHECK(b.theta_path0.isIdentity(0.0));
    CHECK(b.alive.minCoeff() == 1.0);
    CHECK(b.t_ramp == 0.1);
}

TEST_CASE("Einstein chart: damped transport matches the exponential") {
    // On curvature -1 the frame-coordinate Ricci action is -(m-1) I, so
    // Theta(s) = e^{(m-1)s} I along every path; a strong oracle for the Heun
    // stepping and for frame orthonormality feeding the Ricci action.
    for (int m : {2, 3}) {
        const ConformalChart chart = poincare_ball_chart(m);
        BismutOptions opts;
        opts.seed = 5;
        const double s = 0.5;
        auto one = [](const Eigen::VectorXd&) { return 1.0; };
        const PathBatch b = simulate_batch(chart, Eigen::VectorXd::Zero(m), one, s, 4, opts);
        REQUIRE(b.alive(0) == 1.0);
        const double want = std::exp((m - 1) * s);
        const Eigen::MatrixXd err = b.theta_path0 - want * Eigen::MatrixXd::Identity(m, m);
        CHECK(err.cwiseAbs().maxCoeff() < 1e-6 * want);
        // Single-step Gram drift is O(|dx|^2) with a chi-square tail; the
        // every-step renormalization resets it before it can feed Theta.
        CHECK(b.frame_residual < 1e-3);
    }
}

TEST_CASE("intrinsic drift: radial moment identity") {
    // cosh of the distance is a Delta-eigenfunction with eigenvalue m, so
    // E cosh d(o, X_s) = e^{m s}; validates the drift and the variance-2s
    // diffusion normalization together.
    for (int m : {2, 3}) {
        const ConformalChart chart = poincare_ball_chart(m);
        const Eigen::VectorXd o = Eigen::VectorXd::Zero(m);
        auto coshdist = [&](const Eigen::VectorXd& y) { return std::cosh(chart.distance(o, y)); };
        BismutOptions opts;
        opts.seed = 17;
        const double s = 0.25;
        const PathBatch b = simulate_batch(chart, o, coshdist, s, 10000, opts);
        CHECK(b.alive.minCoeff() == 1.0);  // domain exit negligible at this horizon
        const double mean = b.f.sum() / double(b.f.size());
        const double want = std::exp(m * s);
        const double sd = std::sqrt((b.f - mean).square().sum() / double(b.f.size() - 1));
        const double se = sd / std::sqrt(double(b.f.size()));
        CHECK(std::abs(mean - want) < 4.0 * se + 2e-3);
    }
}

TEST_CASE("flat derivative estimator hits the closed form") {
    const ConformalChart chart = euclidean_chart(2);
    BismutOptions opts;
    opts.seed = 23;
    const PathBatch b = simulate_batch(chart, vec2(0, 0), flat_gauss, 0.5, 20000, opts);
    const DirectionalEstimate est = directional_estimate(b, chart, vec2(0, 0), vec2(1, 0));
    CHECK(est.t_ramp == 0.5);
    CHECK(est.alive_fraction == 1.0);
    CHECK(est.mean_exit == 0.5);
    CHECK(est.std_err < 2e-3);
    CHECK(std::abs(est.value - kFlatExact) < 4.0 * est.std_err);
    CHECK(est.cs_exact);
    // Orthogonal direction has zero derivative by symmetry.
    const DirectionalEstimate ort = directional_estimate(b, chart, vec2(0, 0), vec2(0, 1));
    CHECK(std::abs(ort.value) < 4.0 * ort.std_err);
    // Gradient assembly agrees with the per-direction estimates.
    const GradientEstimate g = gradient_estimate(b);
    CHECK(std::abs(g.grad(0) - est.value) < TIGHT);
    CHECK(std::abs(g.grad(1) - ort.value) < TIGHT);
    CHECK(std::abs(g.norm - g.grad.norm()) < TIGHT);
}

TEST_CASE("short ramp: estimator stays unbiased, energy certificate holds") {
    // Ramp guard concentrates the integral on [0, 0.015]; the estimator mean
    // is unchanged and the realized energy approaches 1/(2T) while staying
    // under the curvature-rate ceiling for s = 1/2.
    const ConformalChart chart = euclidean_chart(2);
    BismutOptions opts;
    opts.seed = 29;
    opts.ramp_guard = 0.015;
    const PathBatch b = simulate_batch(chart, vec2(0, 0), flat_gauss, 0.5, 20000, opts);
    CHECK(b.t_ramp == 0.015);
    const DirectionalEstimate est = directional_estimate(b, chart, vec2(0, 0), vec2(1, 0));
    CHECK(est.std_err > 0.006);
    CHECK(est.std_err < 0.02);
    CHECK(std::abs(est.value - kFlatExact) < 4.0 * est.std_err);
    CHECK(est.cs_exact);
    // factor1^2 estimates P_s(f^2)(0) = (1/3) e^{-1/3}.
    CHECK(std::abs(est.factor1 - 0.48871656921117142) < 0.02);
    // Realized energy: S ~ N(0, 1/(2T)) exactly on the flat chart.
    const double energy = 1.0 / (2.0 * b.t_ramp);
    CHECK(std::abs(est.factor2_sq - energy) < 3.0 * est.factor2_sq_se + 0.02 * energy);
    // Stays below the curvature-rate bound 5 pi^2 at s = 1/2 with slack.
    CHECK(est.factor2_sq + 3.0 * est.factor2_sq_se < 49.348022005446790);
}

TEST_CASE("curved derivative estimator matches the quadrature oracle") {
    // Curvature -1, m = 2: P_s f by geodesic polar quadrature around x, its
    // radial derivative by central differences, against the path estimator.
    const double s = 0.5;
    auto semigroup_at = [&](double rho) {
        auto outer = [&](double r) {
            const double p = hyperbolic2_kernel(s, r);
            if (p == 0.0) return 0.0;
            auto inner = [&](double th) {
                const double c = std::cosh(rho) * std::cosh(r) -
                                 std::sinh(rho) * std::sinh(r) * std::cos(th);
                const double d = std::acosh(std::max(1.0, c));
                return std::exp(-d * d);
            };
            return p * std::sinh(r) * 2.0 * integrate(inner, 0.0, pi(), 1e-9);
        };
        return integrate(outer, 0.0, 3.0, 1e-8) + integrate(outer, 3.0, 8.0, 1e-8);
    };
    const double rho0 = 2.0 * std::atanh(0.15);
    const double h = 0.02;
    const double oracle = (semigroup_at(rho0 + h) - semigroup_at(rho0 - h)) / (2.0 * h);

    const ConformalChart chart = poincare_ball_chart(2);
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(2);
    auto f = [&](const Eigen::VectorXd& y) {
        const double d = chart.distance(o, y);
        return std::exp(-d * d);
    };
    BismutOptions opts;
    opts.seed = 31;
    const Eigen::VectorXd x0 = vec2(0.15, 0.0);
    const PathBatch b = simulate_batch(chart, x0, f, s, 20000, opts);
    // Unit radial direction: chart vector e_1 / lambda has g-norm one.
    const Eigen::VectorXd v = vec2(1.0 / std::exp(chart.psi(x0)), 0.0);
    const DirectionalEstimate est = directional_estimate(b, chart, x0, v);
    CHECK(oracle < -0.05);  // the fixture has a genuinely nonzero derivative
    CHECK(std::abs(est.value - oracle) < 4.0 * est.std_err + 1e-4);
    CHECK(est.cs_exact);
}

TEST_CASE("radial symmetry: gradient vanishes at the center") {
    const ConformalChart chart = poincare_ball_chart(2);
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(2);
    auto f = [&](const Eigen::VectorXd& y) {
        const double d = chart.distance(o, y);
        return std::exp(-d * d);
    };
    BismutOptions opts;
    opts.seed = 37;
    const PathBatch b = simulate_batch(chart, o, f, 0.25, 5000, opts);
    const GradientEstimate g = gradient_estimate(b);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(g.grad(k)) < 4.5 * g.std_err(k) + 1e-12);
}

TEST_CASE("determinism and thread invariance") {
    const ConformalChart chart = poincare_ball_chart(2);
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(2);
    auto f = [&](const Eigen::VectorXd& y) { return y(0) + 0.2 * y(1) * y(1); };
    BismutOptions opts;
    opts.seed = 41;
    const double s = 0.05;
    const PathBatch a = simulate_batch(chart, o, f, s, 1000, opts);
    const PathBatch b = simulate_batch(chart, o, f, s, 1000, opts);
    BismutOptions thr = opts;
    thr.threads = 3;
    const PathBatch c = simulate_batch(chart, o, f, s, 1000, thr);
    BismutOptions other = opts;
    other.seed = 42;
    const PathBatch d = simulate_batch(chart, o, f, s, 1000, other);

    const Eigen::VectorXd dir = vec2(0.5, -0.25);
    const DirectionalEstimate ea = directional_estimate(a, chart, o, dir);
    const DirectionalEstimate eb = directional_estimate(b, chart, o, dir);
    const DirectionalEstimate ec = directional_estimate(c, chart, o, dir);
    const DirectionalEstimate ed = directional_estimate(d, chart, o, dir);
    CHECK(ea.value == eb.value);
    CHECK(ea.std_err == eb.std_err);
    CHECK(ea.value == ec.value);  // thread count cannot change results
    CHECK(ea.std_err == ec.std_err);
    CHECK((a.q - c.q).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ea.value != ed.value);
}

TEST_CASE("time-step invariance within statistical error") {
    const ConformalChart chart = poincare_ball_chart(2);
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(2);
    auto f = [&](const Eigen::VectorXd& y) { return std::exp(-(y - vec2(0.2, 0)).squaredNorm()); };
    const double s = 0.25;
    BismutOptions coarse;
    coarse.seed = 43;
    coarse.dt = 5e-4;
    BismutOptions fine;
    fine.seed = 44;  // independent seeds: same-seed paths diverge anyway
    fine.dt = 2.5e-4;
    const PathBatch a = simulate_batch(chart, o, f, s, 4000, coarse);
    const PathBatch b = simulate_batch(chart, o, f, s, 4000, fine);
    const Eigen::VectorXd v = vec2(0.5, 0.0);
    const DirectionalEstimate ea = directional_estimate(a, chart, o, v);
    const DirectionalEstimate eb = directional_estimate(b, chart, o, v);
    CHECK(std::abs(ea.value - eb.value) < 3.0 * (ea.std_err + eb.std_err));
}

TEST_CASE("chart exit kills paths; exit times are recorded") {
    const ConformalChart chart = poincare_ball_chart(2, 0.3);
    const Eigen::VectorXd o = Eigen::VectorXd::Zero(2);
    auto f = [](const Eigen::VectorXd& y) { return 1.0 + y(0); };
    BismutOptions opts;
    opts.seed = 47;
    opts.exit_radius = 0.4;  // geodesic radius, inside the kill boundary
    const double s = 0.25;
    const PathBatch b = simulate_batch(chart, o, f, s, 2000, opts);
    const double alive = b.alive.sum() / 2000.0;
    CHECK(alive > 0.02);
    CHECK(alive < 0.95);
    // Killed paths contribute zero f.
    for (int i = 0; i < 2000; ++i)
        if (b.alive(i) == 0.0) CHECK(b.f(i) == 0.0);
    CHECK(b.exit_time.maxCoeff() <= s + 1e-15);
    CHECK(b.exit_time.minCoeff() > 0.0);
    const DirectionalEstimate est = directional_estimate(b, chart, o, vec2(1, 0));
    CHECK(std::isfinite(est.value));
    CHECK(est.mean_exit < s);
    CHECK(est.alive_fraction == alive);
}

TEST_CASE("sampler validation") {
    const ConformalChart chart = euclidean_chart(2);
    auto f = [](const Eigen::VectorXd&) { return 0.0; };
    BismutOptions opts;
    CHECK_THROWS_AS(simulate_batch(chart, Eigen::VectorXd::Zero(3), f, 0.5, 10, opts),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_batch(chart, vec2(0, 0), f, 0.50012345, 10, opts),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_batch(chart, vec2(0, 0), f, 0.5, 0, opts), std::invalid_argument);
    const ConformalChart tiny = poincare_ball_chart(2, 0.2);
    Eigen::VectorXd outside = vec2(0.25, 0.0);
    CHECK_THROWS_AS(simulate_batch(tiny, outside, f, 0.5, 10, opts), std::invalid_argument);
    const PathBatch b = simulate_batch(chart, vec2(0, 0), f, 0.01, 10, opts);
    CHECK_THROWS_AS(directional_estimate(b, chart, vec2(0, 0), Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
}
