#pragma once
// Shared helpers for the test binaries: seeded random SPD pairs and the
// tolerance ladder used across suites.
#include "metriclab/metric_pair.hpp"
#include "metriclab/rng.hpp"

#include <Eigen/Dense>

namespace testsup {

constexpr double TIGHT = 1e-12;    // closed-form identities
constexpr double IDENT = 1e-10;    // matrix identity residuals
constexpr double OPERATOR = 1e-8;  // discrete operator identities

inline double pi() { return 3.14159265358979323846; }
inline double pi_sq() { return pi() * pi(); }

// Well-conditioned random SPD matrix: random orthogonal basis, log-uniform
// spectrum in [e^-spread, e^spread].
inline Eigen::MatrixXd random_spd(metriclab::RngStream& rng, int m, double spread = 1.5) {
    Eigen::MatrixXd A(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) A(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd d(m);
    for (int i = 0; i < m; ++i) d(i) = std::exp((2.0 * rng.uniform() - 1.0) * spread);
    return Q * d.asDiagonal() * Q.transpose();
}

}  // namespace testsup
