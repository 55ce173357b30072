#pragma once
// Adaptive Simpson quadrature for the smooth radial integrands used
// throughout; explicit tail majorants live with the callers.
#include <cmath>
#include <functional>
#include <stdexcept>

namespace metriclab {

namespace detail {
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Absolute-tolerance adaptive Simpson on [a,b].
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (!(b >= a)) throw std::invalid_argument("integrate: b < a");
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral over [a, inf) via the substitution r = a + t/(1-t).
template <typename F>
double integrate_to_infinity(const F& f, double a, double tol = 1e-12) {
    auto g = [&](double t) {
        const double om = 1.0 - t;
        const double r = a + t / om;
        const double jac = 1.0 / (om * om);
        const double v = f(r) * jac;
        // Deep in the tail a decaying f underflows while the jacobian (or a
        // growth factor inside f) overflows; the product is genuinely zero.
        return std::isfinite(v) ? v : 0.0;
    };
    // The endpoint t=1 is never evaluated: stop at 1-eps where the mapped
    // integrand of every decaying family is far below tol.
    return integrate(g, 0.0, 1.0 - 1e-9, tol);
}

// Upper bound for the incomplete gamma integral  int_R^inf r^k e^{-lam r} dr
// valid whenever lam*R > k: the integrand is log-concave and decays at least
// geometrically with rate (lam - k/R) past R.
inline double poly_exp_tail_bound(double k, double lam, double R) {
    if (!(lam > 0.0) || !(R > 0.0)) throw std::invalid_argument("poly_exp_tail_bound: need lam>0, R>0");
    const double rate = lam - k / R;
    if (!(rate > 0.0)) throw std::invalid_argument("poly_exp_tail_bound: R too small for a certified tail");
    return std::pow(R, k) * std::exp(-lam * R) / rate;
}

// Upper bound for  int_R^inf r^k e^{-(r/w)^2} dr,  valid when 2R/w^2 > k/R.
inline double poly_gauss_tail_bound(double k, double w, double R) {
    if (!(w > 0.0) || !(R > 0.0)) throw std::invalid_argument("poly_gauss_tail_bound: need w>0, R>0");
    const double rate = 2.0 * R / (w * w) - k / R;  // minimal log-derivative past R
    if (!(rate > 0.0)) throw std::invalid_argument("poly_gauss_tail_bound: R too small for a certified tail");
    return std::pow(R, k) * std::exp(-(R / w) * (R / w)) / rate;
}

// Exact value of  int_R^inf e^{nu r - (r/w)^2} dr  (complete the square).
inline double exp_gauss_tail(double nu, double w, double R) {
    const double shift = 0.5 * nu * w;
    const double pref = std::exp(shift * shift) * w * 0.8862269254527580137;  // sqrt(pi)/2
    return pref * std::erfc(R / w - shift);
}

}  // namespace metriclab
