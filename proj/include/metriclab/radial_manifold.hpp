#pragma once
// Rotationally symmetric model manifolds g = dr^2 + f(r)^2 g_{S^{m-1}} with a
// closed-form warp family; curvature, curvature-rate bounds, and volumes.
#include <string>

namespace metriclab {

enum class WarpKind { Euclidean, Hyperbolic, SphereCap, PolyExp };

// PolyExp: f(r) = r * exp(a * (1 - exp(-(r/b)^2))); smooth at the pole with
// f(0)=0, f'(0)=1, curvature decaying like a Gaussian in r.
struct RadialWarp {
    WarpKind kind = WarpKind::Euclidean;
    double a = 0.0, b = 1.0;

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
    // (1 - f'(r)^2) / f(r)^2, the comparison term of the tangential Ricci
    // eigenvalue, evaluated cancellation-free near the pole.
    double curvature_ratio(double r) const;
    std::string name() const;
};

struct RadialManifold {
    int dim = 2;
    RadialWarp warp;
    RadialManifold() = default;
    RadialManifold(int m, RadialWarp w);

    bool constant_curvature() const;
    // sup_{r>=0} f(r)/r and inf: finite sandwiching constants for the
    // polynomial-volume families; used by tail certificates.
    double warp_over_r_sup() const;
    double warp_over_r_inf() const;
};

RadialManifold euclidean_model(int m);
RadialManifold hyperbolic_model(int m);
RadialManifold sphere_cap_model(int m);
RadialManifold poly_exp_model(int m, double a, double b);

// Largest admissible radial coordinate: +inf except for the sphere cap.
double domain_radius(const RadialManifold& man);

struct RicciEigs {
    double radial;      // Ric(e_r, e_r) for a unit radial vector
    double tangential;  // Ric(e_t, e_t) for a unit tangential vector
    double min() const { return radial < tangential ? radial : tangential; }
};

// Warped-product Ricci: radial -(m-1) f''/f, tangential -f''/f + (m-2)(1-f'^2)/f^2.
// At the pole the continuous limit is taken (evaluated at r = 1e-6).
RicciEigs ricci_quadratic_form(const RadialManifold& man, double r);

enum class Provenance { ClosedForm, Sampled, Configured };
const char* provenance_name(Provenance p);

// Local curvature-rate bounds at radius x_r:
//   ricci_neg  = max(0, -K), K the best lower Ricci bound on the half-ball;
//   rate_const = pi^2 (m+3) + pi sqrt(ricci_neg (m-1)) + 4 ricci_neg;
//   rate_at(s) = rate_const / (1 - exp(-rate_const * s)).
struct LocalBounds {
    double ricci_neg = 0.0;
    double rate_const = 0.0;
    Provenance provenance = Provenance::ClosedForm;
    double rate_at(double s) const;
};

LocalBounds local_bounds(const RadialManifold& man, double x_r);
// The same quantities from explicitly supplied K (lower Ricci bound).
LocalBounds local_bounds_from_ricci(int m, double ricci_lower);

double volume_measure_weight(const RadialManifold& man, double r);
double unit_sphere_area(int m);  // area of S^{m-1}
// Pole-centered geodesic ball volume.
double ball_volume(const RadialManifold& man, double r);

}  // namespace metriclab
