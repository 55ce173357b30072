#pragma once
// Pointwise calculus for a pair of Riemannian metrics at one point.
//
// Conventions, fixed once here and relied on everywhere else:
//  * A metric is an m x m SPD matrix G acting on tangent components; the dual
//    metric on covector components is G^{-1}.
//  * The pair operator on covectors is A = G H^{-1}; it is similar to the SPD
//    whitened matrix L^T H^{-1} L (G = L L^T), so its spectrum is positive.
//  * rho = det(A)^{-1/2} is the density of the h-volume against the g-volume.
//  * deviation = 2 sinh((m/4) max_i |log lambda_i|).
//  * s_scalar = rho^{1/2} - rho^{-1/2};  s_hat = (rho A)^{1/2} - (rho A)^{-1/2}
//    evaluated through the eigenprojectors of the whitened matrix.
#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace metriclab {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline double sign_or_zero(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Symmetry within 1e-12 of the largest entry; eigenvalues above 1e-12 * trace.
template <typename Scalar>
void require_spd(const MatX<Scalar>& G, const char* what) {
    if (G.rows() != G.cols() || G.rows() < 1)
        throw std::invalid_argument(std::string(what) + ": matrix must be square");
    const Scalar scale = G.cwiseAbs().maxCoeff();
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * std::max(scale, Scalar(1)))
        throw std::invalid_argument(std::string(what) + ": matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(G, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= Scalar(1e-12) * G.trace())
        throw std::invalid_argument(std::string(what) + ": matrix not positive definite");
}

template <typename Scalar>
struct PairDeviation {
    int dim = 0;
    MatX<Scalar> pair_op;      // A = G H^{-1} on covector components
    VecX<Scalar> eigenvalues;  // spectrum of A, ascending
    Scalar rho = Scalar(1);
    Scalar deviation = Scalar(0);
    Scalar s_scalar = Scalar(0);
    MatX<Scalar> s_hat;        // (rho A)^{1/2} - (rho A)^{-1/2}
    MatX<Scalar> u_hat;        // sgn(s_hat) (rho A)^{-1/2}, sgn(0) := 0
    Scalar u_factor = Scalar(0);  // sgn(s_scalar) rho^{-1/2}
    // Eigenbasis bookkeeping: columns of basis diagonalize A (and rho*A),
    // basis_inv = basis^{-1}; kept so callers can form other spectral functions.
    MatX<Scalar> basis, basis_inv;
};

// Operator norm of M acting on covectors, measured in the metric J:
// largest singular value of L_J^{-1} M L_J with J = L_J L_J^T.
template <typename Scalar>
Scalar covector_operator_norm(const MatX<Scalar>& J, const MatX<Scalar>& M) {
    Eigen::LLT<MatX<Scalar>> llt(J);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("covector_operator_norm: metric not SPD");
    const MatX<Scalar> L = llt.matrixL();
    const MatX<Scalar> W = L.template triangularView<Eigen::Lower>().solve(M * L);
    Eigen::JacobiSVD<MatX<Scalar>> svd(W);
    return svd.singularValues()(0);
}

template <typename Scalar>
PairDeviation<Scalar> pair_operator(const MatX<Scalar>& G, const MatX<Scalar>& H) {
    if (G.rows() != H.rows() || G.cols() != H.cols())
        throw std::invalid_argument("pair_operator: dimension mismatch");
    require_spd(G, "pair_operator: g");
    require_spd(H, "pair_operator: h");
    const int m = static_cast<int>(G.rows());

    PairDeviation<Scalar> out;
    out.dim = m;

    Eigen::LLT<MatX<Scalar>> lltG(G), lltH(H);
    const MatX<Scalar> L = lltG.matrixL();
    const MatX<Scalar> HinvL = lltH.solve(L);
    const MatX<Scalar> W = L.transpose() * HinvL;  // SPD, similar to A
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(W);
    if (es.info() != Eigen::Success) throw std::runtime_error("pair_operator: eigensolver failed");
    out.eigenvalues = es.eigenvalues();
    if (out.eigenvalues.minCoeff() <= Scalar(0))
        throw std::runtime_error("pair_operator: nonpositive pair spectrum");

    out.pair_op = G * lltH.solve(MatX<Scalar>::Identity(m, m));

    Scalar log_sum = Scalar(0), log_max = Scalar(0);
    for (int i = 0; i < m; ++i) {
        const Scalar l = std::log(out.eigenvalues(i));
        log_sum += l;
        log_max = std::max(log_max, std::abs(l));
    }
    out.rho = std::exp(Scalar(-0.5) * log_sum);
    out.deviation = Scalar(2) * std::sinh(Scalar(0.25) * Scalar(m) * log_max);
    out.s_scalar = std::sqrt(out.rho) - Scalar(1) / std::sqrt(out.rho);
    out.u_factor = Scalar(sign_or_zero(double(out.s_scalar))) / std::sqrt(out.rho);

    // A = L W L^{-1}: spectral functions of rho*A via the basis B = L V.
    out.basis = L * es.eigenvectors();
    out.basis_inv = es.eigenvectors().transpose() *
                    L.template triangularView<Eigen::Lower>()
                        .solve(MatX<Scalar>::Identity(m, m));
    VecX<Scalar> fs(m), us(m);
    for (int i = 0; i < m; ++i) {
        const Scalar mu = out.rho * out.eigenvalues(i);
        const Scalar rt = std::sqrt(mu);
        fs(i) = rt - Scalar(1) / rt;
        us(i) = Scalar(sign_or_zero(double(fs(i)))) / rt;
    }
    out.s_hat = out.basis * fs.asDiagonal() * out.basis_inv;
    out.u_hat = out.basis * us.asDiagonal() * out.basis_inv;
    return out;
}

// h = exp(-(4/m) phi) g, the conformal family used by oracles and fixtures.
template <typename Scalar>
MatX<Scalar> conformal_metric(const MatX<Scalar>& G, Scalar phi) {
    const int m = static_cast<int>(G.rows());
    return std::exp(Scalar(-4) * phi / Scalar(m)) * G;
}

struct PairIdentityResiduals {
    double product_rho;    // |rho_{h,g} rho_{g,h} - 1|
    double product_op;     // max entry of |A_{h,g} A_{g,h} - I|
    double rho_vs_det;     // |rho - det(A)^{-1/2}| with det from an LU route
    double deviation_sym;  // |deviation_{g,h} - deviation_{h,g}|
};

template <typename Scalar>
PairIdentityResiduals inverse_pair_identities(const MatX<Scalar>& G, const MatX<Scalar>& H) {
    const auto gh = pair_operator(G, H);
    const auto hg = pair_operator(H, G);
    PairIdentityResiduals r;
    r.product_rho = std::abs(double(gh.rho * hg.rho - Scalar(1)));
    r.product_op = double((hg.pair_op * gh.pair_op - MatX<Scalar>::Identity(G.rows(), G.cols()))
                              .cwiseAbs()
                              .maxCoeff());
    // Independent determinant route (LU partial-pivot) against the eigen route.
    const Scalar det = gh.pair_op.fullPivLu().determinant();
    r.rho_vs_det = std::abs(double(gh.rho - Scalar(1) / std::sqrt(det)));
    r.deviation_sym = std::abs(double(gh.deviation - hg.deviation));
    return r;
}

struct ElementaryBoundResult {
    double lhs;        // max(|s_scalar|, |s_hat|_g, |s_hat|_h)
    double deviation;
    bool holds;        // lhs <= deviation + 1e-12
    double s_abs, s_hat_norm_g, s_hat_norm_h;
};

template <typename Scalar>
ElementaryBoundResult elementary_bound_check(const MatX<Scalar>& G, const MatX<Scalar>& H) {
    const auto d = pair_operator(G, H);
    ElementaryBoundResult r;
    r.s_abs = std::abs(double(d.s_scalar));
    r.s_hat_norm_g = double(covector_operator_norm(G, d.s_hat));
    r.s_hat_norm_h = double(covector_operator_norm(H, d.s_hat));
    r.lhs = std::max(r.s_abs, std::max(r.s_hat_norm_g, r.s_hat_norm_h));
    r.deviation = double(d.deviation);
    r.holds = r.lhs <= r.deviation + 1e-12;
    return r;
}

struct QuasiIsometryCertificate {
    int dim = 0;
    std::size_t samples = 0;
    double constant_c = 1.0;   // all pair eigenvalues lie in [1/C, C]
    double sup_deviation = 0.0;
    double lambda_min = 1.0, lambda_max = 1.0;
    bool bound_holds = false;  // sup_deviation <= 2 sinh((m/4) log C) + 1e-12
};

template <typename Scalar>
QuasiIsometryCertificate quasi_isometry_scan(const std::vector<MatX<Scalar>>& Gs,
                                             const std::vector<MatX<Scalar>>& Hs) {
    if (Gs.size() != Hs.size() || Gs.empty())
        throw std::invalid_argument("quasi_isometry_scan: need equal nonempty sample lists");
    QuasiIsometryCertificate c;
    c.dim = static_cast<int>(Gs[0].rows());
    c.samples = Gs.size();
    double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0, supd = 0.0;
    for (std::size_t i = 0; i < Gs.size(); ++i) {
        const auto d = pair_operator(Gs[i], Hs[i]);
        lmin = std::min(lmin, double(d.eigenvalues.minCoeff()));
        lmax = std::max(lmax, double(d.eigenvalues.maxCoeff()));
        supd = std::max(supd, double(d.deviation));
    }
    c.lambda_min = lmin;
    c.lambda_max = lmax;
    c.constant_c = std::max(lmax, 1.0 / lmin);
    c.sup_deviation = supd;
    c.bound_holds = supd <= 2.0 * std::sinh(0.25 * c.dim * std::log(c.constant_c)) + 1e-12;
    return c;
}

}  // namespace metriclab
