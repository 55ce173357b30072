#pragma once
// Ricci-type flow d/ds g_s = kappa * Ric_{g_s} on two tractable families:
// Einstein metrics (exact scalar ODE) and 2-d radial conformal metrics
// (method of lines on a truncated grid), plus the proof-step checks: the
// Gronwall sandwich, the pair-eigenvalue log bound, and the deviation bound.
#include "metriclab/criterion.hpp"
#include "metriclab/radial_manifold.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace metriclab {

struct FlowTrajectory {
    int dim = 2;
    double kappa = 0.0;
    double horizon = 0.0;  // requested S
    bool einstein = false;
    double lambda = 0.0;   // Einstein constant, Ric_{g0} = lambda g0
    // Model carrying the volume weight (and the base metric of the conformal
    // family); absent for Einstein constants that match no warp model.
    RadialManifold base;
    bool has_weight_model = true;
    bool perturbed_initial = false;  // conformal family started from w0 != 0

    std::vector<double> times;  // strictly increasing from 0
    std::vector<double> scale;  // Einstein: g_s = c(s) g0

    Eigen::ArrayXd grid_r;                    // conformal family: cell centers
    Eigen::ArrayXd w0;                        // initial exponent, g0 = e^{w0} base
    std::vector<Eigen::ArrayXd> conformal_w;  // exponent per stored time

    bool validity = true;
    double blowup_time = 0.0;  // meaningful when !validity
    int monitored_nodes = 0;
    double boundary_influence = 0.0;  // twin-grid defect on the monitored region

    // sup over stored times of |Ric_{g_s}| on g_s-unit vectors; one entry per
    // grid node (conformal) or a single entry (Einstein).
    Eigen::ArrayXd a_field;
    double sup_a = 0.0;
};

// c(s) = 1 + kappa lambda s exactly; when kappa lambda < 0 the horizon is
// truncated just before the blowup 1 + kappa lambda s = 0 and validity drops.
FlowTrajectory einstein_flow(int m, double lambda, double kappa, double S, int n_times = 201);

struct ConformalFlowOptions {
    double R = 8.0;    // grid extent
    int n = 400;       // cells; centers at (i + 1/2) R/n
    double dt = 0.0;   // 0: stability-limited step chosen automatically
    int n_store = 41;  // stored time slices, uniform on [0, S]
};

// 2-d flow in the conformal gauge g_s = e^{w(s,.)} base with
// dw/ds = kappa e^{-w} (K_base - lap_base w / 2); reflecting outer boundary,
// with a twin run on an extended grid recording the boundary influence on
// r <= 0.75 R. Only kappa <= 0 (the diffusive direction) is supported.
FlowTrajectory conformal_flow_2d(const RadialManifold& base, const ConformalProfile& w0,
                                 double kappa, double S,
                                 const ConformalFlowOptions& opts = {});

struct FlowCheckReport {
    bool holds = false;
    double worst = 0.0;       // minimal slack, negative when violated
    double worst_time = 0.0;
    double worst_node = 0.0;  // radius of the worst grid node (0 for Einstein)
    std::size_t checked = 0;
};

// e^{-A|kappa|s} g0 <= g_s <= e^{A|kappa|s} g0 with A = sup of the a-field.
FlowCheckReport gronwall_sandwich_check(const FlowTrajectory& traj, double tol = 1e-8);
// max |log lambda| over spec(pair(g0, g_s)) <= A(x) |kappa| s, pointwise.
FlowCheckReport eigen_log_bound_check(const FlowTrajectory& traj, double tol = 1e-8);
// deviation(g_s, g0) <= 2 sinh((m/4) S |kappa| A(x)), pointwise.
FlowCheckReport flow_delta_bound_check(const FlowTrajectory& traj, double tol = 1e-8);

struct FlowPipelineReport {
    bool sup_a_certified = false;    // finite curvature sup along the flow
    bool envelope_dominates = false; // supplied envelope majorizes the a-field
    CriterionReport integral;
    bool certified = false;
    std::string message;  // "hypotheses certified" or the failing hypothesis
};

// Checks the finiteness hypothesis, verifies the certified envelope against
// the measured a-field, and hands the envelope to the flow criterion.
FlowPipelineReport flow_spectral_pipeline(const FlowTrajectory& traj,
                                          const ConformalProfile& a_envelope);

}  // namespace metriclab
