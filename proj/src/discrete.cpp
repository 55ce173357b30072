#include "metriclab/discrete.hpp"

#include "metriclab/metric_pair.hpp"
#include "metriclab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace metriclab {
namespace {

struct EdgeInfo {
    int axis;
    int lo, hi;  // node indices, -1 marks the Dirichlet boundary
};

std::vector<EdgeInfo> enumerate_edges(const DiscreteGeometry& geo) {
    std::vector<EdgeInfo> edges;
    auto id = [&](int ix, int iy) { return ix + geo.nx * iy; };
    for (int iy = 0; iy < geo.ny; ++iy)
        for (int i = 0; i <= geo.nx; ++i)
            edges.push_back({0, i > 0 ? id(i - 1, iy) : -1, i < geo.nx ? id(i, iy) : -1});
    if (geo.dim == 2)
        for (int j = 0; j <= geo.ny; ++j)
            for (int ix = 0; ix < geo.nx; ++ix)
                edges.push_back({1, j > 0 ? id(ix, j - 1) : -1, j < geo.ny ? id(ix, j) : -1});
    return edges;
}

// sqrt(det)/axis-entry * cell: the dual-metric edge measure for diagonal
// metrics; reduces to metric^{-1/2} * dx in one dimension.
double edge_measure(const Eigen::VectorXd& diag, int axis, double cell) {
    double det = 1.0;
    for (int k = 0; k < diag.size(); ++k) det *= diag(k);
    return std::sqrt(det) / diag(axis) * cell;
}

double pair_deviation_from_logs(int dim, double max_abs_log) {
    return 2.0 * std::sinh(0.25 * dim * max_abs_log);
}

const Eigen::VectorXd& side_weight(const DiscreteOperatorSet& ops, MetricSide j) {
    return j == MetricSide::G ? ops.weight_g : ops.weight_h;
}

}  // namespace

DiscreteGeometry make_line_geometry(int n, double length,
                                    const std::function<double(double)>& g_of_x,
                                    const std::function<double(double)>& h_of_x) {
    if (n < 2 || !(length > 0.0))
        throw std::invalid_argument("make_line_geometry: need n >= 2 interior nodes, length > 0");
    DiscreteGeometry geo;
    geo.dim = 1;
    geo.nx = n;
    geo.ny = 1;
    geo.hx = length / (n + 1);
    geo.hy = 0.0;
    geo.metric_g.resize(n, 1);
    geo.metric_h.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 1) * geo.hx;
        geo.metric_g(i, 0) = g_of_x(x);
        geo.metric_h(i, 0) = h_of_x(x);
    }
    return geo;
}

DiscreteGeometry make_plane_geometry(int nx, int ny, double lx, double ly,
                                     const std::function<Eigen::Vector2d(double, double)>& g_diag,
                                     const std::function<Eigen::Vector2d(double, double)>& h_diag) {
    if (nx < 2 || ny < 2 || !(lx > 0.0) || !(ly > 0.0))
        throw std::invalid_argument("make_plane_geometry: need nx, ny >= 2 and positive lengths");
    DiscreteGeometry geo;
    geo.dim = 2;
    geo.nx = nx;
    geo.ny = ny;
    geo.hx = lx / (nx + 1);
    geo.hy = ly / (ny + 1);
    geo.metric_g.resize(nx * ny, 2);
    geo.metric_h.resize(nx * ny, 2);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double x = (ix + 1) * geo.hx;
            const double y = (iy + 1) * geo.hy;
            geo.metric_g.row(ix + nx * iy) = g_diag(x, y).transpose();
            geo.metric_h.row(ix + nx * iy) = h_diag(x, y).transpose();
        }
    return geo;
}

DiscreteOperatorSet build_operators(const DiscreteGeometry& geo) {
    if (geo.dim != 1 && geo.dim != 2)
        throw std::invalid_argument("build_operators: dimension must be 1 or 2");
    if (geo.nx < 1 || geo.ny < 1 || (geo.dim == 1 && geo.ny != 1))
        throw std::invalid_argument("build_operators: bad grid shape");
    if (!(geo.hx > 0.0) || (geo.dim == 2 && !(geo.hy > 0.0)))
        throw std::invalid_argument("build_operators: spacings must be positive");
    const int nodes = geo.nx * geo.ny;
    if (nodes > 2000)
        throw std::invalid_argument(
            "build_operators: dense eigensolve route supports at most 2000 nodes; coarsen the grid");
    if (geo.metric_g.rows() != nodes || geo.metric_h.rows() != nodes ||
        geo.metric_g.cols() != geo.dim || geo.metric_h.cols() != geo.dim)
        throw std::invalid_argument("build_operators: metric table shape mismatch");
    if (!(geo.metric_g.minCoeff() > 0.0) || !(geo.metric_h.minCoeff() > 0.0) ||
        !geo.metric_g.allFinite() || !geo.metric_h.allFinite())
        throw std::invalid_argument("build_operators: degenerate metric entries rejected");

    DiscreteOperatorSet ops;
    ops.dim = geo.dim;
    ops.nodes = nodes;
    ops.cell = geo.dim == 1 ? geo.hx : geo.hx * geo.hy;

    ops.weight_g.resize(nodes);
    ops.weight_h.resize(nodes);
    ops.delta_node.resize(nodes);
    for (int x = 0; x < nodes; ++x) {
        double dg = 1.0, dh = 1.0, max_log = 0.0;
        for (int k = 0; k < geo.dim; ++k) {
            dg *= geo.metric_g(x, k);
            dh *= geo.metric_h(x, k);
            max_log = std::max(max_log, std::abs(std::log(geo.metric_g(x, k) / geo.metric_h(x, k))));
        }
        ops.weight_g(x) = std::sqrt(dg) * ops.cell;
        ops.weight_h(x) = std::sqrt(dh) * ops.cell;
        ops.delta_node(x) = pair_deviation_from_logs(geo.dim, max_log);
    }

    const auto edges = enumerate_edges(geo);
    ops.edges = static_cast<int>(edges.size());
    ops.gradient = Eigen::MatrixXd::Zero(ops.edges, nodes);
    ops.edge_weight_g.resize(ops.edges);
    ops.edge_weight_h.resize(ops.edges);
    ops.delta_edge.resize(ops.edges);
    for (int e = 0; e < ops.edges; ++e) {
        const EdgeInfo& ed = edges[static_cast<std::size_t>(e)];
        const double inv_h = 1.0 / (ed.axis == 0 ? geo.hx : geo.hy);
        if (ed.hi >= 0) ops.gradient(e, ed.hi) += inv_h;
        if (ed.lo >= 0) ops.gradient(e, ed.lo) -= inv_h;

        // Edge metric: arithmetic mean of the adjacent node metrics, one-sided
        // at the boundary.
        Eigen::VectorXd mg, mh;
        if (ed.lo >= 0 && ed.hi >= 0) {
            mg = 0.5 * (geo.metric_g.row(ed.lo) + geo.metric_g.row(ed.hi)).transpose();
            mh = 0.5 * (geo.metric_h.row(ed.lo) + geo.metric_h.row(ed.hi)).transpose();
        } else {
            const int n0 = ed.lo >= 0 ? ed.lo : ed.hi;
            mg = geo.metric_g.row(n0).transpose();
            mh = geo.metric_h.row(n0).transpose();
        }
        ops.edge_weight_g(e) = edge_measure(mg, ed.axis, ops.cell);
        ops.edge_weight_h(e) = edge_measure(mh, ed.axis, ops.cell);
        double max_log = 0.0;
        for (int k = 0; k < geo.dim; ++k)
            max_log = std::max(max_log, std::abs(std::log(mg(k) / mh(k))));
        ops.delta_edge(e) = pair_deviation_from_logs(geo.dim, max_log);
    }

    // Multiplication data; built from weight ratios so the operator identities
    // cancel to rounding error.
    ops.rho = ops.weight_h.cwiseQuotient(ops.weight_g);
    ops.s_node.resize(nodes);
    ops.u_node.resize(nodes);
    for (int x = 0; x < nodes; ++x) {
        const double rt = std::sqrt(ops.rho(x));
        ops.s_node(x) = rt - 1.0 / rt;
        ops.u_node(x) = sign_or_zero(ops.s_node(x)) / rt;
    }
    ops.pair_edge = ops.edge_weight_h.cwiseQuotient(ops.edge_weight_g);
    ops.s_edge.resize(ops.edges);
    ops.u_edge.resize(ops.edges);
    for (int e = 0; e < ops.edges; ++e) {
        const double rt = std::sqrt(ops.pair_edge(e));
        ops.s_edge(e) = rt - 1.0 / rt;
        ops.u_edge(e) = sign_or_zero(ops.s_edge(e)) / rt;
    }

    for (MetricSide j : {MetricSide::G, MetricSide::H}) {
        const Eigen::VectorXd& w = j == MetricSide::G ? ops.weight_g : ops.weight_h;
        const Eigen::VectorXd& me = j == MetricSide::G ? ops.edge_weight_g : ops.edge_weight_h;
        const Eigen::MatrixXd stiff =
            ops.gradient.transpose() * me.asDiagonal() * ops.gradient;
        const Eigen::VectorXd wroot = w.cwiseSqrt();
        Eigen::MatrixXd whitened =
            wroot.cwiseInverse().asDiagonal() * stiff * wroot.cwiseInverse().asDiagonal();
        whitened = 0.5 * (whitened + whitened.transpose()).eval();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(whitened);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("build_operators: eigensolver failed");
        if (j == MetricSide::G) {
            ops.laplacian_g = w.cwiseInverse().asDiagonal() * stiff;
            ops.evals_g = es.eigenvalues();
            ops.modes_g = es.eigenvectors();
        } else {
            ops.laplacian_h = w.cwiseInverse().asDiagonal() * stiff;
            ops.evals_h = es.eigenvalues();
            ops.modes_h = es.eigenvectors();
        }
    }
    return ops;
}

double adjoint_identity_check(const DiscreteOperatorSet& ops) {
    // The adjoint of the coefficient identification is multiplication by rho:
    // <u, v>_h must equal <u, rho v>_g for every pair. Probed on seeded
    // vectors so the stored multiplier is exercised, not re-derived.
    double worst = 0.0;
    for (int k = 0; k < 8; ++k) {
        RngStream rng(7, static_cast<std::uint64_t>(k));
        Eigen::VectorXd u(ops.nodes), v(ops.nodes);
        for (int i = 0; i < ops.nodes; ++i) u(i) = k == 0 ? 1.0 : rng.normal();
        for (int i = 0; i < ops.nodes; ++i) v(i) = k == 0 ? 1.0 : rng.normal();
        const double lhs = u.dot(ops.weight_h.cwiseProduct(v));
        const double rhs = u.dot(ops.weight_g.cwiseProduct(ops.rho.cwiseProduct(v)));
        const double nu = std::sqrt(u.dot(ops.weight_h.cwiseProduct(u)));
        const double nv = std::sqrt(v.dot(ops.weight_g.cwiseProduct(v)));
        worst = std::max(worst, std::abs(lhs - rhs) / (nu * nv));
    }
    return worst;
}

Eigen::MatrixXd semigroup_matrix(const DiscreteOperatorSet& ops, MetricSide j, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("semigroup_matrix: need s >= 0");
    const Eigen::VectorXd& w = side_weight(ops, j);
    const Eigen::VectorXd& ev = j == MetricSide::G ? ops.evals_g : ops.evals_h;
    const Eigen::MatrixXd& Q = j == MetricSide::G ? ops.modes_g : ops.modes_h;
    const Eigen::VectorXd decay = (-s * ev.array()).exp();
    const Eigen::VectorXd wroot = w.cwiseSqrt();
    return wroot.cwiseInverse().asDiagonal() * (Q * decay.asDiagonal() * Q.transpose()) *
           wroot.asDiagonal();
}

Eigen::VectorXd semigroup_apply(const DiscreteOperatorSet& ops, MetricSide j, double s,
                                const Eigen::VectorXd& v) {
    if (v.size() != ops.nodes) throw std::invalid_argument("semigroup_apply: size mismatch");
    if (!(s >= 0.0)) throw std::invalid_argument("semigroup_apply: need s >= 0");
    const Eigen::VectorXd& w = side_weight(ops, j);
    const Eigen::VectorXd& ev = j == MetricSide::G ? ops.evals_g : ops.evals_h;
    const Eigen::MatrixXd& Q = j == MetricSide::G ? ops.modes_g : ops.modes_h;
    const Eigen::VectorXd wroot = w.cwiseSqrt();
    Eigen::VectorXd y = Q.transpose() * wroot.cwiseProduct(v);
    y = y.cwiseProduct(((-s * ev.array()).exp()).matrix());
    return wroot.cwiseInverse().cwiseProduct(Q * y);
}

double hpw_formula_check(const DiscreteOperatorSet& ops, double s, int trials,
                         unsigned long long seed) {
    if (!(s > 0.0)) throw std::invalid_argument("hpw_formula_check: need s > 0");
    if (trials < 1) throw std::invalid_argument("hpw_formula_check: need trials >= 1");

    const Eigen::MatrixXd Pg = semigroup_matrix(ops, MetricSide::G, s);
    const Eigen::MatrixXd Ph = semigroup_matrix(ops, MetricSide::H, s);
    const Eigen::MatrixXd Pg_half = semigroup_matrix(ops, MetricSide::G, 0.5 * s);
    const Eigen::MatrixXd& D = ops.gradient;

    // First block: every factor applied explicitly in sequence.
    const Eigen::VectorXd s_edge_root = ops.s_edge.cwiseAbs().cwiseSqrt();
    Eigen::MatrixXd block = D * Pg;                     // gradient semigroup, g
    block = s_edge_root.asDiagonal() * block;           // edge S-root, g side
    block = ops.u_edge.asDiagonal() * block;            // edge U
    block = s_edge_root.asDiagonal() * block;           // edge S-root, h side
    // Adjoint of the h-side gradient semigroup in the weighted products.
    const Eigen::MatrixXd term1 =
        Ph * (ops.weight_h.cwiseInverse().asDiagonal() *
              (D.transpose() * (ops.edge_weight_h.asDiagonal() * block)));

    const Eigen::VectorXd s_node_root = ops.s_node.cwiseAbs().cwiseSqrt();
    Eigen::MatrixXd nblock = Pg_half * (ops.laplacian_g * Pg_half);  // half-time splitting
    nblock = s_node_root.asDiagonal() * nblock;         // node S-root, g side
    nblock = ops.u_node.asDiagonal() * nblock;          // node U
    nblock = s_node_root.asDiagonal() * nblock;         // node S-root, h side
    const Eigen::MatrixXd term2 = Ph * nblock;

    const Eigen::MatrixXd T = term1 - term2;
    const Eigen::MatrixXd PhPg = Ph * Pg;

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(seed, static_cast<std::uint64_t>(t));
        Eigen::VectorXd fg(ops.nodes), fh(ops.nodes);
        for (int i = 0; i < ops.nodes; ++i) fg(i) = rng.normal();
        for (int i = 0; i < ops.nodes; ++i) fh(i) = rng.normal();

        const Eigen::VectorXd wh_fh = ops.weight_h.cwiseProduct(fh);
        const double lhs = wh_fh.dot(T * fg);
        const double rhs = (ops.laplacian_h * fh).cwiseProduct(ops.weight_h).dot(PhPg * fg) -
                           wh_fh.dot(PhPg * (ops.laplacian_g * fg));
        const double ng = std::sqrt(fg.cwiseProduct(ops.weight_g.cwiseProduct(fg)).sum());
        const double nh = std::sqrt(fh.cwiseProduct(ops.weight_h.cwiseProduct(fh)).sum());
        worst = std::max(worst, std::abs(lhs - rhs) / (ng * nh));
    }
    return worst;
}

HsChainReport hs_norm_chain(const DiscreteOperatorSet& ops, double s) {
    if (!(s > 0.0)) throw std::invalid_argument("hs_norm_chain: need s > 0");
    HsChainReport rep;

    const Eigen::MatrixXd Pg = semigroup_matrix(ops, MetricSide::G, s);
    const Eigen::MatrixXd Ph = semigroup_matrix(ops, MetricSide::H, s);

    rep.row_sum_max_g = Pg.rowwise().sum().maxCoeff();
    rep.row_sum_max_h = Ph.rowwise().sum().maxCoeff();
    rep.row_abs_max_g = Pg.cwiseAbs().rowwise().sum().maxCoeff();
    rep.row_abs_max_h = Ph.cwiseAbs().rowwise().sum().maxCoeff();
    rep.sub_stochastic =
        std::max(rep.row_sum_max_g, rep.row_sum_max_h) <= 1.0 + 1e-10;

    const Eigen::VectorXd inv_wg = ops.weight_g.cwiseInverse();
    const Eigen::VectorXd inv_wh = ops.weight_h.cwiseInverse();
    // Kernel row quantities: sum_y p(x,y)^2 w_y and max_y |p(x,y)|.
    const Eigen::VectorXd rowq_g = Pg.array().square().matrix() * inv_wg;
    const Eigen::VectorXd rowq_h = Ph.array().square().matrix() * inv_wh;
    const Eigen::VectorXd psi4_g =
        (Pg.cwiseAbs() * inv_wg.asDiagonal()).rowwise().maxCoeff();
    const Eigen::VectorXd psi4_h =
        (Ph.cwiseAbs() * inv_wh.asDiagonal()).rowwise().maxCoeff();

    const Eigen::VectorXd s_abs = ops.s_node.cwiseAbs();

    // Identification defect (I*I - 1) P^g_s: kernel (rho(x)-1) p_g(x,y).
    // (rho-1)^2 = rho S^2, so the tracked prefactor is max(rho|S|) times the
    // worst absolute kernel row mass.
    {
        HsChainEntry e;
        e.label = "identification defect";
        e.hs_sq = 0.0;
        double sum = 0.0;
        for (int x = 0; x < ops.nodes; ++x) {
            const double d = ops.rho(x) - 1.0;
            e.hs_sq += d * d * rowq_g(x) * ops.weight_g(x);
            sum += s_abs(x) * psi4_g(x) * ops.weight_g(x);
        }
        e.constant = (ops.rho.cwiseProduct(s_abs)).maxCoeff() * rep.row_abs_max_g;
        e.majorant = e.constant * sum;
        e.slack = e.majorant - e.hs_sq;
        rep.entries.push_back(e);
    }

    // Scalar factors |S|^{1/2} P^j_s, bounded by the node deviation.
    for (MetricSide j : {MetricSide::G, MetricSide::H}) {
        const Eigen::VectorXd& rowq = j == MetricSide::G ? rowq_g : rowq_h;
        const Eigen::VectorXd& psi4 = j == MetricSide::G ? psi4_g : psi4_h;
        const Eigen::VectorXd& w = side_weight(ops, j);
        HsChainEntry e;
        e.label = std::string("scalar factor, side ") + side_name(j);
        double sum = 0.0;
        for (int x = 0; x < ops.nodes; ++x) {
            // max(delta, |s|) equals delta in exact arithmetic; the clamp
            // keeps the majorant monotone under rounding (in one dimension
            // the elementary bound is an equality).
            const double mult = std::max(ops.delta_node(x), s_abs(x));
            e.hs_sq += s_abs(x) * rowq(x) * w(x);
            sum += mult * psi4(x) * w(x);
        }
        e.constant = j == MetricSide::G ? rep.row_abs_max_g : rep.row_abs_max_h;
        e.majorant = e.constant * sum;
        e.slack = e.majorant - e.hs_sq;
        rep.entries.push_back(e);
    }

    // Gradient factors |S-hat|^{1/2} d P^j_s, bounded via the edge deviation
    // (the edge multiplier obeys |s_edge| <= delta_edge pointwise).
    for (MetricSide j : {MetricSide::G, MetricSide::H}) {
        const Eigen::MatrixXd DP = ops.gradient * (j == MetricSide::G ? Pg : Ph);
        const Eigen::VectorXd& inv_w = j == MetricSide::G ? inv_wg : inv_wh;
        const Eigen::VectorXd& me = j == MetricSide::G ? ops.edge_weight_g : ops.edge_weight_h;
        const Eigen::VectorXd rowq_e = DP.array().square().matrix() * inv_w;
        HsChainEntry e;
        e.label = std::string("gradient factor, side ") + side_name(j);
        double major = 0.0;
        for (int k = 0; k < ops.edges; ++k) {
            const double sa = std::abs(ops.s_edge(k));
            // Same clamp as the scalar entries: identical per-term factors in
            // the same order make the computed slack nonnegative exactly.
            e.hs_sq += sa * rowq_e(k) * me(k);
            major += std::max(ops.delta_edge(k), sa) * rowq_e(k) * me(k);
        }
        e.constant = 1.0;
        e.majorant = major;
        e.slack = e.majorant - e.hs_sq;
        rep.entries.push_back(e);
    }

    rep.all_nonneg = true;
    for (const auto& e : rep.entries)
        if (e.slack < 0.0) rep.all_nonneg = false;
    return rep;
}

SpectrumComparison spectrum_compare(const DiscreteOperatorSet& ops) {
    SpectrumComparison out;
    out.evals_g = ops.evals_g;
    out.evals_h = ops.evals_h;

    // The node deviation stores 2 sinh((m/4) max|log lambda|); invert it to
    // recover the axis-ratio log band and hence the quasi-isometry constant.
    double max_log = 0.0;
    for (int x = 0; x < ops.nodes; ++x)
        max_log = std::max(max_log, std::asinh(0.5 * ops.delta_node(x)) * 4.0 / ops.dim);
    out.constant_c = std::exp(max_log);
    out.band_lo = 1.0 / (out.constant_c * out.constant_c);
    out.band_hi = out.constant_c * out.constant_c;

    out.ratio_min = std::numeric_limits<double>::infinity();
    out.ratio_max = 0.0;
    for (int k = 0; k < ops.nodes; ++k) {
        const double r = ops.evals_h(k) / ops.evals_g(k);
        out.ratio_min = std::min(out.ratio_min, r);
        out.ratio_max = std::max(out.ratio_max, r);
    }
    out.in_band = out.ratio_min >= out.band_lo - 1e-12 && out.ratio_max <= out.band_hi + 1e-12;
    return out;
}

}  // namespace metriclab
