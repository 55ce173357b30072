#pragma once
// Weighted finite-difference pairs on a shared rectangular grid: Laplacians
// H_j = d* d in the j-weighted inner products, the identification operator
// with its multiplication adjoint, the operator-identity check, and the
// Hilbert-Schmidt estimate chain. Dirichlet truncation; every check here is
// an identity valid for any self-adjoint realization, so truncation is sound.
#include "metriclab/criterion.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace metriclab {

// Diagonal metrics per interior node; 1-d when ny == 1. Node (ix, iy) sits at
// ((ix+1) hx, (iy+1) hy) inside a Dirichlet box, index ix + nx*iy.
struct DiscreteGeometry {
    int dim = 1;
    int nx = 0, ny = 1;
    double hx = 0.0, hy = 0.0;
    Eigen::MatrixXd metric_g, metric_h;  // nodes x dim, positive diagonal entries
};

DiscreteGeometry make_line_geometry(int n, double length,
                                    const std::function<double(double)>& g_of_x,
                                    const std::function<double(double)>& h_of_x);
DiscreteGeometry make_plane_geometry(int nx, int ny, double lx, double ly,
                                     const std::function<Eigen::Vector2d(double, double)>& g_diag,
                                     const std::function<Eigen::Vector2d(double, double)>& h_diag);

// Assembled operator pair. The gradient is metric-independent; each metric
// contributes node weights sqrt(det) * cell and edge weights
// sqrt(det)/metric_axis * cell from arithmetically averaged edge metrics, so
// the relation m_g = (rho_e a_e)^{-1} m_h holds exactly and the operator
// identities below close to rounding error.
struct DiscreteOperatorSet {
    int dim = 1;
    int nodes = 0, edges = 0;
    double cell = 0.0;
    Eigen::MatrixXd gradient;                      // d: nodes -> edges
    Eigen::VectorXd weight_g, weight_h;            // node measures
    Eigen::VectorXd edge_weight_g, edge_weight_h;  // edge measures
    Eigen::MatrixXd laplacian_g, laplacian_h;      // H_j = M_j^{-1} d^T Mhat_j d

    Eigen::VectorXd rho;     // node density weight_h / weight_g
    Eigen::VectorXd s_node;  // rho^{1/2} - rho^{-1/2}
    Eigen::VectorXd u_node;  // sgn(s_node) rho^{-1/2}
    Eigen::VectorXd pair_edge;  // q_e = edge_weight_h / edge_weight_g = rho_e a_e
    Eigen::VectorXd s_edge;     // q^{1/2} - q^{-1/2}
    Eigen::VectorXd u_edge;     // sgn(s_edge) q^{-1/2}
    Eigen::VectorXd delta_node, delta_edge;  // pair deviation at nodes / edges

    // Whitened factorizations M^{1/2} H M^{-1/2} = Q diag(evals) Q^T.
    Eigen::VectorXd evals_g, evals_h;
    Eigen::MatrixXd modes_g, modes_h;
};

// Dense assembly; rejects grids beyond 2000 nodes (dense eigensolve route).
DiscreteOperatorSet build_operators(const DiscreteGeometry& geo);

// Residual of the discrete adjoint of the identification against node-wise
// multiplication by the determinant-route density.
double adjoint_identity_check(const DiscreteOperatorSet& ops);

Eigen::MatrixXd semigroup_matrix(const DiscreteOperatorSet& ops, MetricSide j, double s);
Eigen::VectorXd semigroup_apply(const DiscreteOperatorSet& ops, MetricSide j, double s,
                                const Eigen::VectorXd& v);

// Operator-identity check: the decomposition of the heat-sandwiched
// difference into the S/U-factor products, evaluated on seeded vector pairs.
// Returns the maximal residual scaled by the product of the vector norms.
double hpw_formula_check(const DiscreteOperatorSet& ops, double s, int trials,
                         unsigned long long seed = 2024);

struct HsChainEntry {
    std::string label;
    double hs_sq = 0.0;      // weighted Frobenius norm squared, computed directly
    double constant = 1.0;   // tracked prefactor of the majorant
    double majorant = 0.0;   // full bound; slack = majorant - hs_sq
    double slack = 0.0;
};

struct HsChainReport {
    double row_sum_max_g = 0.0, row_sum_max_h = 0.0;  // signed kernel row sums
    double row_abs_max_g = 0.0, row_abs_max_h = 0.0;  // carried into the constants
    bool sub_stochastic = false;                      // signed sums <= 1 + 1e-10
    std::vector<HsChainEntry> entries;
    bool all_nonneg = false;
};

HsChainReport hs_norm_chain(const DiscreteOperatorSet& ops, double s);

struct SpectrumComparison {
    Eigen::VectorXd evals_g, evals_h;  // ascending
    double ratio_min = 0.0, ratio_max = 0.0;
    double constant_c = 1.0;  // node pair-eigenvalue certificate
    double band_lo = 0.0, band_hi = 0.0;  // [1/C^2, C^2]
    bool in_band = false;
};

SpectrumComparison spectrum_compare(const DiscreteOperatorSet& ops);

}  // namespace metriclab
