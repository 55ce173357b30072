#pragma once
// Conformal coordinate charts g = e^{2 psi} (dx, dx) for the sampler: metric
// algebra, the intrinsic drift of the geometric Laplacian, mixed Ricci, and
// exact distances for the model fixtures.
#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>

namespace metriclab {

struct ConformalChart {
    int dim = 0;
    std::string name;
    // Points with |x| >= domain_radius are outside the chart; paths crossing
    // it are killed.
    double domain_radius = std::numeric_limits<double>::infinity();
    std::function<double(const Eigen::VectorXd&)> psi;            // log conformal factor
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_psi;
    // Isotropic mixed Ricci: R^i_j = ric_iso(x) delta^i_j. Both model charts
    // are Einstein, so a scalar suffices.
    std::function<double(const Eigen::VectorXd&)> ric_iso;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> distance;

    bool in_domain(const Eigen::VectorXd& x) const { return x.norm() < domain_radius; }
    Eigen::MatrixXd metric(const Eigen::VectorXd& x) const;       // e^{2 psi} I
    Eigen::MatrixXd metric_inv(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd sigma_hat(const Eigen::VectorXd& x) const;    // e^{-psi} I
    // Intrinsic drift of the generator Delta: (m-2) e^{-2 psi} grad psi.
    Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
};

// Flat chart of R^m: psi = 0, zero drift and curvature.
ConformalChart euclidean_chart(int m);
// Ball model of constant curvature -1: e^{psi} = 2 / (1 - |x|^2).
ConformalChart poincare_ball_chart(int m, double domain_radius = 0.995);

}  // namespace metriclab
