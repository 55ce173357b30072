#include "metriclab/radial_manifold.hpp"

#include "metriclab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace metriclab {

namespace {
constexpr double kPoleEps = 1e-6;     // evaluation point for pole limits
constexpr double kSphereMargin = 0.1; // sphere cap stays below pi - margin
}  // namespace

double RadialWarp::value(double r) const {
    switch (kind) {
        case WarpKind::Euclidean: return r;
        case WarpKind::Hyperbolic: return std::sinh(r);
        case WarpKind::SphereCap: return std::sin(r);
        case WarpKind::PolyExp: {
            const double q = (r / b) * (r / b);
            return r * std::exp(a * (1.0 - std::exp(-q)));
        }
    }
    return r;
}

double RadialWarp::d1(double r) const {
    switch (kind) {
        case WarpKind::Euclidean: return 1.0;
        case WarpKind::Hyperbolic: return std::cosh(r);
        case WarpKind::SphereCap: return std::cos(r);
        case WarpKind::PolyExp: {
            const double e = std::exp(-(r / b) * (r / b));
            const double psi1 = a * 2.0 * r / (b * b) * e;
            const double q = (r / b) * (r / b);
            return (1.0 + r * psi1) * std::exp(a * (1.0 - std::exp(-q)));
        }
    }
    return 1.0;
}

double RadialWarp::d2(double r) const {
    switch (kind) {
        case WarpKind::Euclidean: return 0.0;
        case WarpKind::Hyperbolic: return std::sinh(r);
        case WarpKind::SphereCap: return -std::sin(r);
        case WarpKind::PolyExp: {
            const double e = std::exp(-(r / b) * (r / b));
            const double psi1 = a * 2.0 * r / (b * b) * e;
            const double psi2 = a * 2.0 / (b * b) * e * (1.0 - 2.0 * r * r / (b * b));
            const double q = (r / b) * (r / b);
            const double ex = std::exp(a * (1.0 - std::exp(-q)));
            return ex * (2.0 * psi1 + r * psi2 + r * psi1 * psi1);
        }
    }
    return 0.0;
}

double RadialWarp::curvature_ratio(double r) const {
    switch (kind) {
        case WarpKind::Euclidean: return 0.0;
        case WarpKind::Hyperbolic: return -1.0;
        case WarpKind::SphereCap: return 1.0;
        case WarpKind::PolyExp: {
            // (1 - f'^2)/f^2 with f' = (1 + r psi') e^{psi}. Near the pole both
            // factors are 1 + O(r^2); the naive difference cancels, so form
            // f'^2 - 1 = expm1(2 psi + 2 log1p(r psi')).
            const double u = (r / b) * (r / b);
            const double e = std::exp(-u);
            const double psi = -a * std::expm1(-u);
            const double rpsi1 = 2.0 * a * u * e;
            const double f = value(r);
            if (1.0 + rpsi1 <= 0.0) {  // warp not monotone here; no cancellation
                const double f1 = d1(r);
                return (1.0 - f1 * f1) / (f * f);
            }
            return -std::expm1(2.0 * psi + 2.0 * std::log1p(rpsi1)) / (f * f);
        }
    }
    return 0.0;
}

std::string RadialWarp::name() const {
    switch (kind) {
        case WarpKind::Euclidean: return "euclidean";
        case WarpKind::Hyperbolic: return "hyperbolic";
        case WarpKind::SphereCap: return "sphere-cap";
        case WarpKind::PolyExp:
            return "poly-exp(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
    }
    return "?";
}

RadialManifold::RadialManifold(int m, RadialWarp w) : dim(m), warp(w) {
    if (m < 2) throw std::invalid_argument("RadialManifold: dim must be >= 2");
    if (w.kind == WarpKind::PolyExp && !(w.b > 0.0))
        throw std::invalid_argument("RadialManifold: poly-exp width must be positive");
    // Pole smoothness: f(0) = 0, f'(0) = 1 within 1e-10 at the probe radius.
    if (std::abs(warp.value(0.0)) > 1e-10 || std::abs(warp.d1(kPoleEps) - 1.0) > 1e-8)
        throw std::invalid_argument("RadialManifold: warp violates f(0)=0, f'(0)=1");
}

bool RadialManifold::constant_curvature() const {
    return warp.kind == WarpKind::Euclidean || warp.kind == WarpKind::Hyperbolic ||
           warp.kind == WarpKind::SphereCap;
}

double RadialManifold::warp_over_r_sup() const {
    switch (warp.kind) {
        case WarpKind::Euclidean: return 1.0;
        case WarpKind::PolyExp: return std::exp(std::max(warp.a, 0.0));
        default:
            throw std::invalid_argument("warp_over_r_sup: only polynomial-volume warps");
    }
}

double RadialManifold::warp_over_r_inf() const {
    switch (warp.kind) {
        case WarpKind::Euclidean: return 1.0;
        case WarpKind::PolyExp: return std::exp(std::min(warp.a, 0.0));
        default:
            throw std::invalid_argument("warp_over_r_inf: only polynomial-volume warps");
    }
}

RadialManifold euclidean_model(int m) { return RadialManifold(m, RadialWarp{WarpKind::Euclidean}); }
RadialManifold hyperbolic_model(int m) { return RadialManifold(m, RadialWarp{WarpKind::Hyperbolic}); }
RadialManifold sphere_cap_model(int m) { return RadialManifold(m, RadialWarp{WarpKind::SphereCap}); }
RadialManifold poly_exp_model(int m, double a, double b) {
    return RadialManifold(m, RadialWarp{WarpKind::PolyExp, a, b});
}

double domain_radius(const RadialManifold& man) {
    if (man.warp.kind == WarpKind::SphereCap)
        return 3.14159265358979323846 - kSphereMargin;
    return std::numeric_limits<double>::infinity();
}

RicciEigs ricci_quadratic_form(const RadialManifold& man, double r) {
    if (r < 0.0) throw std::invalid_argument("ricci_quadratic_form: r < 0");
    if (man.warp.kind == WarpKind::SphereCap && r > 3.14159265358979323846 - kSphereMargin)
        throw std::invalid_argument("ricci_quadratic_form: outside the sphere-cap domain");
    const double re = std::max(r, kPoleEps);
    const double f = man.warp.value(re), f2 = man.warp.d2(re);
    const int m = man.dim;
    RicciEigs out;
    out.radial = -(m - 1) * f2 / f;
    out.tangential = -f2 / f + (m - 2) * man.warp.curvature_ratio(re);
    return out;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::ClosedForm: return "closed-form";
        case Provenance::Sampled: return "sampled-infimum";
        case Provenance::Configured: return "configured";
    }
    return "?";
}

double LocalBounds::rate_at(double s) const {
    if (!(s > 0.0)) throw std::invalid_argument("rate_at: s must be positive");
    const double e = std::expm1(-rate_const * s);  // = e^{-cs} - 1
    return rate_const / (-e);
}

LocalBounds local_bounds_from_ricci(int m, double ricci_lower) {
    LocalBounds b;
    b.ricci_neg = std::max(0.0, -ricci_lower);
    const double pi = 3.14159265358979323846;
    b.rate_const = pi * pi * (m + 3) + pi * std::sqrt(b.ricci_neg * (m - 1)) + 4.0 * b.ricci_neg;
    b.provenance = Provenance::Configured;
    return b;
}

LocalBounds local_bounds(const RadialManifold& man, double x_r) {
    double K;
    Provenance prov;
    if (man.constant_curvature()) {
        const RicciEigs e = ricci_quadratic_form(man, std::max(x_r, kPoleEps));
        K = e.min();
        prov = Provenance::ClosedForm;
    } else {
        // Infimum over the radial shell containing B(x, 1/2); the shell is a
        // superset of the ball, so the sampled K is a valid lower bound.
        const double lo = std::max(0.0, x_r - 0.5), hi = x_r + 0.5;
        const double step = 1e-3;
        K = std::numeric_limits<double>::infinity();
        for (double r = lo; r <= hi + 0.5 * step; r += step)
            K = std::min(K, ricci_quadratic_form(man, r).min());
        prov = Provenance::Sampled;
    }
    LocalBounds b = local_bounds_from_ricci(man.dim, K);
    b.provenance = prov;
    return b;
}

double volume_measure_weight(const RadialManifold& man, double r) {
    if (r < 0.0) throw std::invalid_argument("volume_measure_weight: r < 0");
    return std::pow(man.warp.value(r), man.dim - 1);
}

double unit_sphere_area(int m) {
    if (m < 1) throw std::invalid_argument("unit_sphere_area: m < 1");
    const double pi = 3.14159265358979323846;
    return 2.0 * std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double ball_volume(const RadialManifold& man, double r) {
    if (r < 0.0) throw std::invalid_argument("ball_volume: r < 0");
    if (man.warp.kind == WarpKind::SphereCap && r > 3.14159265358979323846 - kSphereMargin)
        throw std::invalid_argument("ball_volume: radius outside the sphere-cap domain");
    const double val = integrate(
        [&](double t) { return volume_measure_weight(man, t); }, 0.0, r, 1e-13);
    return unit_sphere_area(man.dim) * val;
}

}  // namespace metriclab
