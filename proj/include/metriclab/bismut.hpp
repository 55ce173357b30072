#pragma once
// Derivative-free gradient estimation for the heat semigroup e^{s Delta}:
// Brownian paths in a conformal chart, parallel frame transport, the damped
// transport process, and the stochastic integral whose f-weighted mean is the
// directional derivative. Convention: dX = drift dt + sqrt(2) sigma_hat dW,
// the anti-development increments have covariance 2 dt per frame coordinate,
// and the estimator carries an overall factor 1/2 calibrated against the flat
// Gaussian closed form.
#include "metriclab/chart.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>

namespace metriclab {

struct BismutOptions {
    double dt = 5e-4;
    // Ramp support T = min(s, ramp_guard); the pull vector decays linearly to
    // zero over [0, T], concentrating the stochastic integral near the start.
    double ramp_guard = std::numeric_limits<double>::infinity();
    // When finite, the integral also stops at the first grid exit from the
    // geodesic ball of this radius around the start point.
    double exit_radius = std::numeric_limits<double>::infinity();
    int renorm_every = 1;   // frame re-orthonormalization cadence (steps)
    int threads = 1;
    std::uint64_t seed = 2026;
};

// Raw per-path outputs in deterministic path order; every estimate below is a
// function of these, so reruns and thread counts cannot change results.
struct PathBatch {
    int dim = 0;
    double s = 0.0;
    double t_ramp = 0.0;
    Eigen::ArrayXd f;          // f(X_s), zero for killed paths
    Eigen::ArrayXd alive;      // 1 while the path stayed inside the chart
    Eigen::MatrixXd q;         // dim x n: sum Theta^T P^T G sqrt(2) sigma_hat dW
    Eigen::ArrayXd exit_time;  // min(first exit, s); equals s without exits
    double frame_residual = 0.0;  // worst g-Gram deviation seen before renorm
    // Diagnostic: the damped transport at time s along path 0 (frame coords);
    // on an Einstein chart this is exp(-ric s) I independent of the path.
    Eigen::MatrixXd theta_path0;
};

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

PathBatch simulate_batch(const ConformalChart& chart, const Eigen::VectorXd& x0,
                         const ScalarField& f, double s, int n_paths,
                         const BismutOptions& opts = {});

struct DirectionalEstimate {
    double value = 0.0;       // estimate of (d P_s f)(v) at x0
    double std_err = 0.0;
    double factor1 = 0.0;     // sqrt(mean f^2 1_alive), the semigroup factor
    double factor2 = 0.0;     // sqrt(mean S^2), S the halved ramp integral
    double factor2_sq = 0.0;
    double factor2_sq_se = 0.0;
    bool cs_exact = false;    // sample Cauchy-Schwarz |est| <= f1c * f2
    double alive_fraction = 0.0;
    double mean_exit = 0.0;   // average of min(exit, s)
    double t_ramp = 0.0;
};

// v_chart is a tangent vector at x0 in chart coordinates; its frame image is
// e^{psi(x0)} v_chart, whose euclidean norm is the g-norm of v.
DirectionalEstimate directional_estimate(const PathBatch& batch, const ConformalChart& chart,
                                         const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& v_chart);

struct GradientEstimate {
    Eigen::VectorXd grad;     // frame coordinates; |grad| is the g-norm
    Eigen::VectorXd std_err;  // componentwise standard errors
    double norm = 0.0;
    double norm_std_err = 0.0;  // euclidean norm of the component errors
};

GradientEstimate gradient_estimate(const PathBatch& batch);

}  // namespace metriclab
