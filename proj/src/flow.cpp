#include "metriclab/flow.hpp"

#include "metriclab/metric_pair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace metriclab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cell-centered radial grid with the conformal exponent w and the measured
// curvature K of e^{w} base. The Laplacian is the flux form (f w')'/f, which
// vanishes through the pole face automatically because every warp has f(0)=0;
// the outer face flux is zeroed, giving the reflecting boundary.
struct FlowGrid {
    double h = 0.0;
    Eigen::ArrayXd r, f_cent, k_base, w;
    Eigen::ArrayXd f_face;  // n+1 face values f(i h)
    Eigen::ArrayXd k1, k2, wmid;

    void init(const RadialManifold& base, const ConformalProfile& w0, double step, int n) {
        h = step;
        r.resize(n);
        f_cent.resize(n);
        k_base.resize(n);
        w.resize(n);
        f_face.resize(n + 1);
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) * h;
            r(i) = x;
            f_cent(i) = base.warp.value(x);
            k_base(i) = ricci_quadratic_form(base, x).radial;
            w(i) = w0.phi(x);
        }
        for (int i = 0; i <= n; ++i) f_face(i) = base.warp.value(i * h);
        k1.resize(n);
        k2.resize(n);
        wmid.resize(n);
    }

    // K_{e^{wf} base} = e^{-wf} (K_base - lap_base wf / 2) on the cells.
    void curvature(const Eigen::ArrayXd& wf, Eigen::ArrayXd& out) const {
        const int n = static_cast<int>(wf.size());
        for (int i = 0; i < n; ++i) {
            const double up = (i + 1 < n) ? f_face(i + 1) * (wf(i + 1) - wf(i)) : 0.0;
            const double dn = (i > 0) ? f_face(i) * (wf(i) - wf(i - 1)) : 0.0;
            const double lap = (up - dn) / (h * h * f_cent(i));
            out(i) = std::exp(-wf(i)) * (k_base(i) - 0.5 * lap);
        }
    }

    // Midpoint rule for dw/ds = kappa K(w).
    void step(double kappa, double dt) {
        curvature(w, k1);
        wmid = w + (0.5 * dt * kappa) * k1;
        curvature(wmid, k2);
        w += (dt * kappa) * k2;
    }
};

void require_valid(const FlowTrajectory& traj, const char* who) {
    if (traj.times.empty()) throw std::invalid_argument(std::string(who) + ": empty trajectory");
    if (!traj.validity)
        throw std::invalid_argument(std::string(who) + ": trajectory invalid before its horizon");
}

int node_count(const FlowTrajectory& traj) {
    return traj.einstein ? 1 : static_cast<int>(traj.grid_r.size());
}

double node_a(const FlowTrajectory& traj, int i) {
    return traj.einstein ? traj.a_field(0) : traj.a_field(i);
}

// Metric components at a node: Einstein scales the identity, the conformal
// family scales the warped-product block diag(1, f^2).
Eigen::MatrixXd node_metric(const FlowTrajectory& traj, int i, double expo_or_scale, bool is_scale) {
    if (traj.einstein)
        return expo_or_scale * Eigen::MatrixXd::Identity(traj.dim, traj.dim);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
    const double f = traj.base.warp.value(traj.grid_r(i));
    B(0, 0) = 1.0;
    B(1, 1) = f * f;
    return (is_scale ? expo_or_scale : std::exp(expo_or_scale)) * B;
}

Eigen::MatrixXd metric_initial(const FlowTrajectory& traj, int i) {
    return traj.einstein ? node_metric(traj, i, 1.0, true)
                         : node_metric(traj, i, traj.w0(i), false);
}

Eigen::MatrixXd metric_at(const FlowTrajectory& traj, std::size_t k, int i) {
    return traj.einstein ? node_metric(traj, i, traj.scale[k], true)
                         : node_metric(traj, i, traj.conformal_w[k](i), false);
}

struct SlackAccum {
    FlowCheckReport rep;
    SlackAccum() {
        rep.holds = true;
        rep.worst = kInf;
    }
    void feed(double slack, double time, double node) {
        ++rep.checked;
        if (slack < rep.worst) {
            rep.worst = slack;
            rep.worst_time = time;
            rep.worst_node = node;
        }
        if (slack < 0.0) rep.holds = false;
    }
};

}  // namespace

FlowTrajectory einstein_flow(int m, double lambda, double kappa, double S, int n_times) {
    if (m < 2) throw std::invalid_argument("einstein_flow: dimension must be at least 2");
    if (!(S > 0.0) || !std::isfinite(S))
        throw std::invalid_argument("einstein_flow: horizon must be positive and finite");
    if (n_times < 2) throw std::invalid_argument("einstein_flow: need at least two times");
    if (!std::isfinite(lambda) || !std::isfinite(kappa))
        throw std::invalid_argument("einstein_flow: lambda and kappa must be finite");

    FlowTrajectory traj;
    traj.dim = m;
    traj.kappa = kappa;
    traj.horizon = S;
    traj.einstein = true;
    traj.lambda = lambda;

    // Ric_{g_s} = lambda g0 stays fixed, so the flow is the exact linear scale
    // c(s) = 1 + kappa lambda s; it leaves the SPD cone when c reaches zero.
    const double rate = kappa * lambda;
    double s_end = S;
    if (rate < 0.0) {
        const double s_star = -1.0 / rate;
        if (s_star <= S) {
            traj.validity = false;
            traj.blowup_time = s_star;
            s_end = s_star * (1.0 - 1e-6);
        }
    }

    traj.times.resize(n_times);
    traj.scale.resize(n_times);
    double c_min = kInf;
    for (int k = 0; k < n_times; ++k) {
        const double s = s_end * k / (n_times - 1);
        traj.times[k] = s;
        traj.scale[k] = 1.0 + rate * s;
        c_min = std::min(c_min, traj.scale[k]);
    }
    // |Ric_{g_s}| on g_s-unit vectors is |lambda| / c(s); extremal at an
    // endpoint since c is monotone, so the stored grid attains it exactly.
    traj.a_field.resize(1);
    traj.a_field(0) = std::abs(lambda) / c_min;
    traj.sup_a = traj.a_field(0);

    if (std::abs(lambda) <= 1e-12) {
        traj.base = euclidean_model(m);
    } else if (std::abs(lambda + (m - 1)) <= 1e-12) {
        traj.base = hyperbolic_model(m);
    } else if (std::abs(lambda - (m - 1)) <= 1e-12) {
        traj.base = sphere_cap_model(m);
    } else {
        traj.base = euclidean_model(m);
        traj.has_weight_model = false;
    }
    return traj;
}

FlowTrajectory conformal_flow_2d(const RadialManifold& base, const ConformalProfile& w0,
                                 double kappa, double S, const ConformalFlowOptions& opts) {
    if (base.dim != 2) throw std::invalid_argument("conformal_flow_2d: base dimension must be 2");
    if (!(S > 0.0) || !std::isfinite(S))
        throw std::invalid_argument("conformal_flow_2d: horizon must be positive and finite");
    if (!(kappa <= 0.0))
        throw std::invalid_argument(
            "conformal_flow_2d: kappa > 0 is anti-diffusive in the conformal gauge");
    if (!(opts.R > 0.0) || opts.n < 16 || opts.n_store < 2)
        throw std::invalid_argument("conformal_flow_2d: need R > 0, n >= 16, n_store >= 2");

    const double h = opts.R / opts.n;
    const int n_big = opts.n + static_cast<int>(std::lround(0.5 * opts.n));
    if (n_big * h > domain_radius(base))
        throw std::invalid_argument(
            "conformal_flow_2d: grid with its causal buffer leaves the model domain");

    FlowTrajectory traj;
    traj.dim = 2;
    traj.kappa = kappa;
    traj.horizon = S;
    traj.base = base;
    traj.perturbed_initial = w0.sup_abs() > 0.0;

    FlowGrid grid, wide;  // wide: same spacing, 1.5x extent, boundary monitor
    grid.init(base, w0, h, opts.n);
    wide.init(base, w0, h, n_big);

    traj.grid_r = grid.r;
    traj.w0 = grid.w;

    int monitored = 0;
    while (monitored < opts.n && grid.r(monitored) <= 0.75 * opts.R) ++monitored;
    traj.monitored_nodes = monitored;

    Eigen::ArrayXd ks(opts.n);
    Eigen::ArrayXd amax = Eigen::ArrayXd::Zero(opts.n);
    double influence = 0.0;

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.conformal_w.push_back(grid.w);
        grid.curvature(grid.w, ks);
        amax = amax.max(ks.abs());
        for (int i = 0; i < monitored; ++i)
            influence = std::max(influence, std::abs(grid.w(i) - wide.w(i)));
    };

    record(0.0);
    double t = 0.0;
    bool ok = true;
    for (int k = 1; k < opts.n_store && ok; ++k) {
        const double target = S * k / (opts.n_store - 1);
        while (target - t > 1e-12 * std::max(1.0, S)) {
            double dt = target - t;
            if (kappa != 0.0) {
                // Forward-Euler style diffusion limit for D = |kappa| e^{-w}/2,
                // shared between the two grids so they see one schedule.
                const double wmin = std::min(grid.w.minCoeff(), wide.w.minCoeff());
                const double stab = 0.5 * h * h / (std::abs(kappa) * std::exp(-wmin));
                if (!(stab > 1e-12)) {  // stiffness collapse near a blowup
                    traj.validity = false;
                    traj.blowup_time = t;
                    ok = false;
                    break;
                }
                dt = std::min(dt, stab);
            }
            if (opts.dt > 0.0) dt = std::min(dt, opts.dt);
            grid.step(kappa, dt);
            wide.step(kappa, dt);
            t += dt;
            const double extreme =
                std::max(grid.w.abs().maxCoeff(), wide.w.abs().maxCoeff());
            if (!grid.w.isFinite().all() || !wide.w.isFinite().all() || extreme > 60.0) {
                traj.validity = false;
                traj.blowup_time = t;
                ok = false;
                break;
            }
        }
        if (ok) record(target);
    }

    traj.a_field = amax;
    traj.sup_a = amax.maxCoeff();
    traj.boundary_influence = influence;
    return traj;
}

FlowCheckReport gronwall_sandwich_check(const FlowTrajectory& traj, double tol) {
    require_valid(traj, "gronwall_sandwich_check");
    SlackAccum acc;
    const double A = traj.sup_a;
    const double ak = std::abs(traj.kappa);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double s = traj.times[k];
        const double hi = std::exp(A * ak * s);
        const double lo = std::exp(-A * ak * s);
        for (int i = 0; i < node_count(traj); ++i) {
            const double ratio = traj.einstein
                                     ? traj.scale[k]
                                     : std::exp(traj.conformal_w[k](i) - traj.w0(i));
            const double node = traj.einstein ? 0.0 : traj.grid_r(i);
            acc.feed(std::min(hi + tol - ratio, ratio - lo + tol), s, node);
        }
    }
    return acc.rep;
}

FlowCheckReport eigen_log_bound_check(const FlowTrajectory& traj, double tol) {
    require_valid(traj, "eigen_log_bound_check");
    SlackAccum acc;
    const double ak = std::abs(traj.kappa);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double s = traj.times[k];
        for (int i = 0; i < node_count(traj); ++i) {
            const auto d = pair_operator<double>(metric_initial(traj, i), metric_at(traj, k, i));
            double log_max = 0.0;
            for (int j = 0; j < d.eigenvalues.size(); ++j)
                log_max = std::max(log_max, std::abs(std::log(d.eigenvalues(j))));
            const double node = traj.einstein ? 0.0 : traj.grid_r(i);
            acc.feed(node_a(traj, i) * ak * s + tol - log_max, s, node);
        }
    }
    return acc.rep;
}

FlowCheckReport flow_delta_bound_check(const FlowTrajectory& traj, double tol) {
    require_valid(traj, "flow_delta_bound_check");
    SlackAccum acc;
    const double coeff = 0.25 * traj.dim * traj.horizon * std::abs(traj.kappa);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double s = traj.times[k];
        for (int i = 0; i < node_count(traj); ++i) {
            const auto d = pair_operator<double>(metric_at(traj, k, i), metric_initial(traj, i));
            const double bound = 2.0 * std::sinh(coeff * node_a(traj, i));
            const double node = traj.einstein ? 0.0 : traj.grid_r(i);
            acc.feed(bound + tol - d.deviation, s, node);
        }
    }
    return acc.rep;
}

FlowPipelineReport flow_spectral_pipeline(const FlowTrajectory& traj,
                                          const ConformalProfile& a_envelope) {
    require_valid(traj, "flow_spectral_pipeline");
    FlowPipelineReport rep;
    rep.integral.criterion_id = "corollary-flow";

    rep.sup_a_certified = std::isfinite(traj.sup_a);
    if (!rep.sup_a_certified) {
        rep.message = "curvature sup along the flow is not finite";
        return rep;
    }

    // The envelope must majorize the measured a-field: on the grid for the
    // conformal family, at probe radii for the constant Einstein field.
    const double slack = 1e-9 * (1.0 + traj.sup_a);
    bool dom = true;
    if (traj.einstein) {
        for (int k = 0; k <= 32 && dom; ++k)
            dom = a_envelope.phi(0.5 * k) >= traj.sup_a - slack;
    } else {
        for (int i = 0; i < node_count(traj) && dom; ++i)
            dom = a_envelope.phi(traj.grid_r(i)) >= traj.a_field(i) - slack;
    }
    if (!dom) {
        rep.message = "envelope does not dominate the measured curvature field";
        return rep;
    }
    rep.envelope_dominates = true;

    if (!std::isfinite(a_envelope.sup_abs())) {
        rep.message = "envelope sup not finite; hypotheses not certified";
        return rep;
    }
    if (!traj.has_weight_model) {
        rep.message = "no volume model for the unit-ball weight";
        return rep;
    }

    FlowCriterionInput in;
    in.base = traj.base;
    in.a_field = a_envelope;
    in.sup_a = a_envelope.sup_abs();
    in.sup_certified = true;
    in.kappa = traj.kappa;
    in.horizon = traj.horizon;
    rep.integral = flow_integral(in);

    rep.certified = rep.integral.verdict == Verdict::Satisfied;
    if (rep.certified) {
        rep.message = traj.einstein
                          ? "hypotheses certified"
                          : "hypotheses certified; envelope verified on the computed region";
    } else if (rep.integral.verdict == Verdict::Diverged) {
        rep.message = "flow criterion integral diverges; hypotheses not certified";
    } else {
        rep.message = "flow criterion integral inconclusive; hypotheses not certified";
    }
    return rep;
}

}  // namespace metriclab
