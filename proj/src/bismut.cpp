#include "metriclab/bismut.hpp"

#include "metriclab/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace metriclab {

namespace {

struct Worker {
    const ConformalChart* chart;
    const Eigen::VectorXd* x0;
    const ScalarField* f;
    double s, dt, t_ramp, exit_radius;
    int renorm_every, steps;
    std::uint64_t seed;
    PathBatch* out;
    double frame_residual = 0.0;
    Eigen::MatrixXd theta_path0;

    // Conformal transport increment: B(P) = dx (gp^T P) + (gp.dx) P - gp (dx^T P),
    // the Christoffel action applied to each frame column.
    static void transport_apply(const Eigen::VectorXd& gp, const Eigen::VectorXd& dx,
                                const Eigen::MatrixXd& P, Eigen::MatrixXd& bp) {
        bp.noalias() = dx * (gp.transpose() * P);
        bp.noalias() += gp.dot(dx) * P;
        bp.noalias() -= gp * (dx.transpose() * P);
    }

    // Modified Gram-Schmidt in the e^{2psi} euclidean inner product; returns
    // the worst prior deviation of the Gram matrix from the identity.
    static double renormalize_frame(double e2psi, Eigen::MatrixXd& P) {
        const Eigen::MatrixXd gram = e2psi * (P.transpose() * P);
        const double residual =
            (gram - Eigen::MatrixXd::Identity(P.cols(), P.cols())).cwiseAbs().maxCoeff();
        for (int j = 0; j < P.cols(); ++j) {
            for (int i = 0; i < j; ++i)
                P.col(j) -= e2psi * P.col(i).dot(P.col(j)) * P.col(i);
            P.col(j) /= std::sqrt(e2psi) * P.col(j).norm();
        }
        return residual;
    }

    void run(int lo, int hi) {
        const int m = chart->dim;
        const double sqrt_dt = std::sqrt(dt), sqrt2 = std::sqrt(2.0);
        const bool track_exit = std::isfinite(exit_radius);
        Eigen::MatrixXd P(m, m), theta(m, m), bp(m, m), bp2(m, m), k1(m, m), k2(m, m);
        Eigen::VectorXd q(m), dw(m), dx(m), x(m), x_new(m), gp(m);
        for (int p = lo; p < hi; ++p) {
            RngStream rng(seed, static_cast<std::uint64_t>(p));
            x = *x0;
            double psi_x = chart->psi(x);
            double ric_x = chart->ric_iso(x);
            P = std::exp(-psi_x) * Eigen::MatrixXd::Identity(m, m);
            theta.setIdentity();
            q.setZero();
            double exit_t = s;
            bool exited = false, alive = true;
            for (int k = 0; k < steps; ++k) {
                for (int i = 0; i < m; ++i) dw(i) = rng.normal() * sqrt_dt;
                // Ito integrand at the left point: Theta^T P^T G sqrt(2) sigma_hat dW
                // = sqrt(2) e^{psi} Theta^T P^T dW for a conformal metric.
                if (!exited && k * dt < t_ramp)
                    q.noalias() += sqrt2 * std::exp(psi_x) * (theta.transpose() * (P.transpose() * dw));
                // Move: drift (m-2) e^{-2 psi} grad psi, diffusion sqrt(2) e^{-psi}.
                if (m != 2)
                    dx = (m - 2) * std::exp(-2.0 * psi_x) * dt * chart->grad_psi(x) +
                         sqrt2 * std::exp(-psi_x) * dw;
                else
                    dx = sqrt2 * std::exp(-psi_x) * dw;
                x_new = x + dx;
                if (!chart->in_domain(x_new)) {
                    alive = false;
                    if (!exited) exit_t = (k + 1) * dt;
                    break;
                }
                // Ricci action in frame coordinates is ric e^{2psi} P^T P; the
                // damped transport gets a Heun step across the move.
                k1.noalias() = P.transpose() * P;
                k1 *= -ric_x * std::exp(2.0 * psi_x);
                // Stratonovich midpoint transport, second order in dx.
                gp = chart->grad_psi(x + 0.5 * dx);
                transport_apply(gp, dx, P, bp);
                transport_apply(gp, dx, bp, bp2);
                P.noalias() -= bp;
                P.noalias() += 0.5 * bp2;
                const double psi_new = chart->psi(x_new);
                const double ric_new = chart->ric_iso(x_new);
                k2.noalias() = P.transpose() * P;
                k2 *= -ric_new * std::exp(2.0 * psi_new);
                bp.noalias() = k1 * theta;
                bp2.noalias() = k2 * (theta + dt * bp);
                theta += 0.5 * dt * (bp + bp2);
                if (track_exit && !exited && chart->distance(*x0, x_new) >= exit_radius) {
                    exited = true;
                    exit_t = (k + 1) * dt;
                }
                if ((k + 1) % renorm_every == 0)
                    frame_residual =
                        std::max(frame_residual, renormalize_frame(std::exp(2.0 * psi_new), P));
                x = x_new;
                psi_x = psi_new;
                ric_x = ric_new;
            }
            out->alive(p) = alive ? 1.0 : 0.0;
            out->f(p) = alive ? (*f)(x) : 0.0;
            out->q.col(p) = q;
            out->exit_time(p) = exit_t;
            if (p == 0) theta_path0 = theta;
        }
    }
};

}  // namespace

PathBatch simulate_batch(const ConformalChart& chart, const Eigen::VectorXd& x0,
                         const ScalarField& f, double s, int n_paths,
                         const BismutOptions& opts) {
    if (chart.dim < 2 || x0.size() != chart.dim)
        throw std::invalid_argument("simulate_batch: chart/x0 dimension mismatch");
    if (!chart.in_domain(x0)) throw std::invalid_argument("simulate_batch: x0 outside the chart");
    if (!(s > 0.0) || !(opts.dt > 0.0))
        throw std::invalid_argument("simulate_batch: s and dt must be positive");
    if (n_paths < 1) throw std::invalid_argument("simulate_batch: need at least one path");
    if (opts.renorm_every < 1)
        throw std::invalid_argument("simulate_batch: renorm_every must be >= 1");

    const int steps = static_cast<int>(std::llround(s / opts.dt));
    if (steps < 1 || std::abs(steps * opts.dt - s) > 1e-9 * s)
        throw std::invalid_argument("simulate_batch: s must be an integer multiple of dt");

    PathBatch batch;
    batch.dim = chart.dim;
    batch.s = s;
    batch.t_ramp = std::min(s, opts.ramp_guard);
    batch.f.resize(n_paths);
    batch.alive.resize(n_paths);
    batch.q.resize(chart.dim, n_paths);
    batch.exit_time.resize(n_paths);

    const int nt = std::max(1, opts.threads);
    std::vector<Worker> workers(static_cast<std::size_t>(nt));
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) {
        Worker& w = workers[static_cast<std::size_t>(t)];
        w.chart = &chart;
        w.x0 = &x0;
        w.f = &f;
        w.s = s;
        w.dt = opts.dt;
        w.t_ramp = batch.t_ramp;
        w.exit_radius = opts.exit_radius;
        w.renorm_every = opts.renorm_every;
        w.steps = steps;
        w.seed = opts.seed;
        w.out = &batch;
        const int lo = static_cast<int>(static_cast<std::int64_t>(n_paths) * t / nt);
        const int hi = static_cast<int>(static_cast<std::int64_t>(n_paths) * (t + 1) / nt);
        pool.emplace_back([&w, lo, hi] { w.run(lo, hi); });
    }
    for (auto& th : pool) th.join();
    for (const Worker& w : workers)
        batch.frame_residual = std::max(batch.frame_residual, w.frame_residual);
    for (const Worker& w : workers)
        if (w.theta_path0.size() > 0) {  // the worker whose range held path 0
            batch.theta_path0 = w.theta_path0;
            break;
        }
    return batch;
}

DirectionalEstimate directional_estimate(const PathBatch& batch, const ConformalChart& chart,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& v_chart) {
    if (v_chart.size() != batch.dim)
        throw std::invalid_argument("directional_estimate: direction dimension mismatch");
    const Eigen::Index n = batch.f.size();
    const Eigen::VectorXd v_frame = std::exp(chart.psi(x0)) * v_chart;

    DirectionalEstimate est;
    est.t_ramp = batch.t_ramp;
    // Control variate: subtracting the sample mean of f 1_alive shifts each
    // term by a mean-zero quantity (the integral has zero expectation).
    const double c = batch.f.sum() / static_cast<double>(n);
    const double half = 1.0 / (2.0 * batch.t_ramp);
    Eigen::ArrayXd ss(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s_i = half * v_frame.dot(batch.q.col(i));
        ss(i) = s_i;
        z(i) = batch.alive(i) * (batch.f(i) - c) * s_i;
    }
    est.value = z.sum() / static_cast<double>(n);
    est.std_err = std::sqrt((z - est.value).square().sum() / static_cast<double>(n - 1) /
                            static_cast<double>(n));
    est.factor1 = std::sqrt((batch.f.square() * batch.alive).sum() / static_cast<double>(n));
    est.factor2_sq = ss.square().sum() / static_cast<double>(n);
    est.factor2 = std::sqrt(est.factor2_sq);
    est.factor2_sq_se = std::sqrt((ss.square() - est.factor2_sq).square().sum() /
                                  static_cast<double>(n - 1) / static_cast<double>(n));
    const double f1_centered =
        std::sqrt(((batch.f - c).square() * batch.alive).sum() / static_cast<double>(n));
    est.cs_exact =
        std::abs(est.value) <= f1_centered * est.factor2 * (1.0 + 1e-12) + 1e-300;
    est.alive_fraction = batch.alive.sum() / static_cast<double>(n);
    est.mean_exit = batch.exit_time.sum() / static_cast<double>(n);
    return est;
}

GradientEstimate gradient_estimate(const PathBatch& batch) {
    const Eigen::Index n = batch.f.size();
    const double c = batch.f.sum() / static_cast<double>(n);
    const double half = 1.0 / (2.0 * batch.t_ramp);
    GradientEstimate g;
    g.grad = Eigen::VectorXd::Zero(batch.dim);
    g.std_err = Eigen::VectorXd::Zero(batch.dim);
    for (int k = 0; k < batch.dim; ++k) {
        Eigen::ArrayXd z(n);
        for (Eigen::Index i = 0; i < n; ++i)
            z(i) = batch.alive(i) * (batch.f(i) - c) * half * batch.q(k, i);
        const double mean = z.sum() / static_cast<double>(n);
        g.grad(k) = mean;
        g.std_err(k) = std::sqrt((z - mean).square().sum() / static_cast<double>(n - 1) /
                                 static_cast<double>(n));
    }
    g.norm = g.grad.norm();
    g.norm_std_err = g.std_err.norm();
    return g;
}

}  // namespace metriclab
