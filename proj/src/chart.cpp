#include "metriclab/chart.hpp"

#include <cmath>
#include <stdexcept>

namespace metriclab {

Eigen::MatrixXd ConformalChart::metric(const Eigen::VectorXd& x) const {
    return std::exp(2.0 * psi(x)) * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::MatrixXd ConformalChart::metric_inv(const Eigen::VectorXd& x) const {
    return std::exp(-2.0 * psi(x)) * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::MatrixXd ConformalChart::sigma_hat(const Eigen::VectorXd& x) const {
    return std::exp(-psi(x)) * Eigen::MatrixXd::Identity(dim, dim);
}

Eigen::VectorXd ConformalChart::drift(const Eigen::VectorXd& x) const {
    return (dim - 2) * std::exp(-2.0 * psi(x)) * grad_psi(x);
}

ConformalChart euclidean_chart(int m) {
    if (m < 2) throw std::invalid_argument("euclidean_chart: dim must be >= 2");
    ConformalChart c;
    c.dim = m;
    c.name = "euclidean";
    c.psi = [](const Eigen::VectorXd&) { return 0.0; };
    c.grad_psi = [m](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(m).eval(); };
    c.ric_iso = [](const Eigen::VectorXd&) { return 0.0; };
    c.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a - b).norm();
    };
    return c;
}

ConformalChart poincare_ball_chart(int m, double domain_radius) {
    if (m < 2) throw std::invalid_argument("poincare_ball_chart: dim must be >= 2");
    if (!(domain_radius > 0.0 && domain_radius < 1.0))
        throw std::invalid_argument("poincare_ball_chart: domain_radius must be in (0,1)");
    ConformalChart c;
    c.dim = m;
    c.name = "poincare-ball";
    c.domain_radius = domain_radius;
    c.psi = [](const Eigen::VectorXd& x) {
        return std::log(2.0) - std::log1p(-x.squaredNorm());
    };
    c.grad_psi = [](const Eigen::VectorXd& x) {
        return (2.0 / (1.0 - x.squaredNorm()) * x).eval();
    };
    c.ric_iso = [m](const Eigen::VectorXd&) { return -(m - 1.0); };
    c.distance = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const double da = 1.0 - a.squaredNorm(), db = 1.0 - b.squaredNorm();
        const double arg = 1.0 + 2.0 * (a - b).squaredNorm() / (da * db);
        return std::acosh(arg);
    };
    return c;
}

}  // namespace metriclab
