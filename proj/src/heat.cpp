#include "metriclab/heat.hpp"

#include "metriclab/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace metriclab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTailAdmission = 1e-10;
}  // namespace

double euclidean_kernel(int m, double s, double d) {
    if (!(s > 0.0)) throw std::invalid_argument("euclidean_kernel: s must be positive");
    return std::pow(4.0 * kPi * s, -0.5 * m) * std::exp(-d * d / (4.0 * s));
}

double hyperbolic3_kernel(double s, double d) {
    if (!(s > 0.0)) throw std::invalid_argument("hyperbolic3_kernel: s must be positive");
    const double ratio = d < 1e-8 ? 1.0 / (1.0 + d * d / 6.0) : d / std::sinh(d);
    return std::pow(4.0 * kPi * s, -1.5) * ratio * std::exp(-s - d * d / (4.0 * s));
}

double hyperbolic2_kernel(double s, double d) {
    if (!(s > 0.0)) throw std::invalid_argument("hyperbolic2_kernel: s must be positive");
    if (d < 0.0) throw std::invalid_argument("hyperbolic2_kernel: d < 0");
    const double pref = std::sqrt(2.0) * std::pow(4.0 * kPi * s, -1.5) * std::exp(-0.25 * s);
    double integral;
    if (d < 1e-12) {
        // cosh b - 1 = 2 sinh^2(b/2); integrand b e^{-b^2/4s} / (sqrt2 sinh(b/2)).
        auto f = [&](double b) {
            if (b < 1e-12) return std::sqrt(2.0);
            const double num = b * std::exp(-b * b / (4.0 * s));
            return num / (std::sqrt(2.0) * std::sinh(0.5 * b));
        };
        integral = integrate_to_infinity(f, 0.0, 1e-13);
    } else {
        // b = d + t^2 removes the inverse-square-root endpoint singularity;
        // cosh b - cosh d = 2 sinh(d + t^2/2) sinh(t^2/2) avoids the small-t
        // cancellation (b - d = t^2 is exact by construction).
        auto f = [&](double t) {
            if (t < 1e-12)  // limit value 2 d e^{-d^2/4s} / sqrt(sinh d)
                return 2.0 * d * std::exp(-d * d / (4.0 * s)) / std::sqrt(std::sinh(d));
            const double b = d + t * t;
            const double num = b * std::exp(-b * b / (4.0 * s)) * 2.0 * t;
            const double den2 = 2.0 * std::sinh(d + 0.5 * t * t) * std::sinh(0.5 * t * t);
            const double v = num / std::sqrt(den2);
            return std::isfinite(v) ? v : 0.0;
        };
        integral = integrate_to_infinity(f, 0.0, 1e-13);
    }
    return pref * integral;
}

bool has_closed_kernel(const RadialManifold& man) {
    if (man.warp.kind == WarpKind::Euclidean) return true;
    return man.warp.kind == WarpKind::Hyperbolic && (man.dim == 2 || man.dim == 3);
}

double closed_kernel(const RadialManifold& man, double s, double d) {
    if (man.warp.kind == WarpKind::Euclidean) return euclidean_kernel(man.dim, s, d);
    if (man.warp.kind == WarpKind::Hyperbolic && man.dim == 3) return hyperbolic3_kernel(s, d);
    if (man.warp.kind == WarpKind::Hyperbolic && man.dim == 2) return hyperbolic2_kernel(s, d);
    throw std::invalid_argument("closed_kernel: no closed form for " + man.warp.name() +
                                " m=" + std::to_string(man.dim));
}

double HeatProfile::eval(double d) const {
    if (d < 0.0) throw std::invalid_argument("HeatProfile::eval: d < 0");
    if (d <= r(0)) {
        // even quadratic through (0, pole_value) and (r0, u0)
        const double t = d / r(0);
        return pole_value + (u(0) - pole_value) * t * t;
    }
    const Eigen::Index n = r.size();
    if (d >= r(n - 1)) return 0.0;
    const double x = (d - r(0)) / step;
    const Eigen::Index i = static_cast<Eigen::Index>(x);
    const double w = x - static_cast<double>(i);
    return u(i) * (1.0 - w) + u(std::min(i + 1, n - 1)) * w;
}

namespace {

// Thomas solve of (I - c*A) x = rhs where A is the tridiagonal flux operator
// with sub/diag/super given; overwrites rhs with x.
void tridiag_solve(std::vector<double>& sub, std::vector<double>& diag,
                   std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct FluxOperator {
    // (Lu)_i = (wf_{i+1}(u_{i+1}-u_i) - wf_i(u_i-u_{i-1})) / (w_i h^2),
    // no flux at the pole face, Dirichlet (ghost = -u_{n-1}) at the outer face.
    std::vector<double> w, wf;
    double h;

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const std::size_t n = u.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double um = i == 0 ? u[0] : u[i - 1];          // zero flux at pole
            const double up = i + 1 == n ? -u[n - 1] : u[i + 1]; // Dirichlet outer
            const double lo = i == 0 ? 0.0 : wf[i] * (u[i] - um);
            const double hi = wf[i + 1] * (up - u[i]);
            out[i] = (hi - lo) / (w[i] * h * h);
        }
    }

    // One Crank-Nicolson step of size dt, in place.
    void cn_step(std::vector<double>& u, double dt) const {
        const std::size_t n = u.size();
        std::vector<double> rhs(n), sub(n), diag(n), sup(n);
        apply(u, rhs);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] + 0.5 * dt * rhs[i];
        const double c = 0.5 * dt / (h * h);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = i == 0 ? 0.0 : wf[i];
            const double hi = wf[i + 1] * (i + 1 == n ? 2.0 : 1.0);  // ghost folds in
            sub[i] = i == 0 ? 0.0 : -c * lo / w[i];
            sup[i] = i + 1 == n ? 0.0 : -c * wf[i + 1] / w[i];
            diag[i] = 1.0 + c * (lo + hi) / w[i];
        }
        tridiag_solve(sub, diag, sup, rhs);
        u = std::move(rhs);
    }
};

}  // namespace

HeatProfile radial_heat_solve(const RadialManifold& man, double s, double R, int n,
                              const HeatSolveOptions& opts) {
    if (!(s > opts.s0)) throw std::invalid_argument("radial_heat_solve: need s > mollification time");
    if (n < 16) throw std::invalid_argument("radial_heat_solve: grid too coarse");
    if (man.warp.kind == WarpKind::SphereCap)
        throw std::invalid_argument("radial_heat_solve: sphere cap is not a complete model");
    const double tail = euclidean_kernel(man.dim, s, R);
    if (tail > kTailAdmission) {
        const double need = std::sqrt(
            4.0 * s * std::log(std::pow(4.0 * kPi * s, -0.5 * man.dim) / kTailAdmission));
        throw std::invalid_argument(
            "radial_heat_solve: truncation radius too small (flat-kernel tail " +
            std::to_string(tail) + " > 1e-10); use R >= " + std::to_string(need + 1.0));
    }

    const double h = R / n;
    FluxOperator op;
    op.h = h;
    op.w.resize(static_cast<std::size_t>(n));
    op.wf.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i)
        op.w[static_cast<std::size_t>(i)] = volume_measure_weight(man, (i + 0.5) * h);
    for (int i = 0; i <= n; ++i)
        op.wf[static_cast<std::size_t>(i)] = volume_measure_weight(man, i * h);

    // Initial condition: cell averages of the flat short-time kernel against
    // the true volume weight, so the discrete mass matches the continuum one.
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const double a = i * h, b = (i + 1) * h;
        if (a > 12.0 * std::sqrt(opts.s0)) break;
        const double cell = integrate(
            [&](double r) {
                return euclidean_kernel(man.dim, opts.s0, r) * volume_measure_weight(man, r);
            },
            a, b, 1e-15);
        u[static_cast<std::size_t>(i)] = cell / (op.w[static_cast<std::size_t>(i)] * h);
    }

    // Adaptive step doubling: accept the two-half-step solution when the
    // max-norm deviation from the full step is under the local target.
    double t = opts.s0;
    double dt = 1e-6;
    std::vector<double> full, half;
    while (t < s - 1e-15) {
        dt = std::min(dt, s - t);
        full = u;
        op.cn_step(full, dt);
        half = u;
        op.cn_step(half, 0.5 * dt);
        op.cn_step(half, 0.5 * dt);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            err = std::max(err, std::abs(full[i] - half[i]));
            scale = std::max(scale, std::abs(half[i]));
        }
        const double rel = err / (scale + 1e-300);
        if (rel > opts.step_tol && dt > 1e-9) {
            dt *= 0.5;
            continue;
        }
        u = std::move(half);
        t += dt;
        if (rel < 0.25 * opts.step_tol) dt = std::min(dt * 1.4, opts.dt_max);
    }

    HeatProfile out;
    out.dim = man.dim;
    out.s = s;
    out.step = h;
    out.method = "crank-nicolson-flux";
    out.r.resize(n);
    out.u.resize(n);
    double mass = 0.0, sup = 0.0;
    for (int i = 0; i < n; ++i) {
        out.r(i) = (i + 0.5) * h;
        out.u(i) = u[static_cast<std::size_t>(i)];
        mass += u[static_cast<std::size_t>(i)] * op.w[static_cast<std::size_t>(i)] * h;
        sup = std::max(sup, u[static_cast<std::size_t>(i)]);
    }
    out.mass = mass * unit_sphere_area(man.dim);
    out.pole_value = (9.0 * out.u(0) - out.u(1)) / 8.0;  // even quadratic fit
    out.sup = std::max(sup, out.pole_value);
    out.tail_bound = tail;
    return out;
}

double radial_inner(const RadialManifold& man, const HeatProfile& a, const HeatProfile& b) {
    if (a.r.size() != b.r.size() || std::abs(a.step - b.step) > 1e-15)
        throw std::invalid_argument("radial_inner: profiles on different grids");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.r.size(); ++i)
        acc += a.u(i) * b.u(i) * volume_measure_weight(man, a.r(i)) * a.step;
    return acc * unit_sphere_area(man.dim);
}

KernelSup kernel_sup(const RadialManifold& man, double s) {
    if (!has_closed_kernel(man))
        throw std::invalid_argument("kernel_sup: no closed form; supply a solved profile");
    KernelSup k;
    k.value = closed_kernel(man, s, 0.0);
    k.provenance = Provenance::ClosedForm;
    return k;
}

KernelSup kernel_sup(const RadialManifold& man, double s, const HeatProfile& solved) {
    if (solved.dim != man.dim || std::abs(solved.s - s) > 1e-15)
        throw std::invalid_argument("kernel_sup: profile does not match (man, s)");
    KernelSup k;
    k.value = solved.sup;
    k.provenance = Provenance::Sampled;
    return k;
}

double volume_upper_bound(int m, double ricci_lower, double ball_vol_1, double a, double b) {
    if (m < 2) throw std::invalid_argument("volume_upper_bound: m < 2");
    if (ricci_lower > 0.0)
        throw std::invalid_argument("volume_upper_bound: ricci_lower must be <= 0");
    if (!(a > 0.0)) throw std::invalid_argument("volume_upper_bound: a must be positive");
    if (!(ball_vol_1 > 0.0)) throw std::invalid_argument("volume_upper_bound: volume must be positive");
    return a * std::exp(b * (-ricci_lower)) / ball_vol_1;
}

void volume_upper_defaults(int m, double* a, double* b) {
    *a = std::pow(8.0, 0.5 * m) * 4.0;
    *b = 1.0;
}

}  // namespace metriclab
