#pragma once
// Heat semigroup e^{sL} for the geometric Laplacian L (no 1/2), on radial
// models: closed-form kernels where known, a conservative radial solver
// otherwise, the kernel-sup bound, and the volume-based upper bound.
#include "metriclab/radial_manifold.hpp"

#include <Eigen/Dense>

#include <string>

namespace metriclab {

// Kernel at distance d for e^{sL} on R^m: (4 pi s)^{-m/2} exp(-d^2/(4s)).
double euclidean_kernel(int m, double s, double d);
// Curvature -1, m = 3: (4 pi s)^{-3/2} (d/sinh d) exp(-s - d^2/(4s)).
double hyperbolic3_kernel(double s, double d);
// Curvature -1, m = 2: McKean's one-dimensional integral, adaptive quadrature.
double hyperbolic2_kernel(double s, double d);
// Dispatch for the constant-curvature models above; throws otherwise.
double closed_kernel(const RadialManifold& man, double s, double d);
bool has_closed_kernel(const RadialManifold& man);

struct HeatProfile {
    int dim = 0;
    double s = 0.0;
    double step = 0.0;          // grid spacing; nodes at (i + 1/2) step
    Eigen::ArrayXd r, u;        // cell centers and kernel values p_s(pole, r)
    double mass = 0.0;          // integral of u against the volume measure
    double sup = 0.0;           // max over grid including pole extrapolation
    double pole_value = 0.0;
    double tail_bound = 0.0;    // flat-kernel value at the truncation radius
    std::string method;

    double eval(double d) const;  // linear interpolation, 0 beyond the grid
};

struct HeatSolveOptions {
    double s0 = 1e-4;       // mollification time for the initial condition
    double dt_max = 5e-4;
    double step_tol = 1e-9; // local step-doubling error target
};

// Crank-Nicolson in conservative (flux) form from a mollified pole delta.
// R must satisfy euclidean_kernel(m, s, R) <= 1e-10 (checked).
HeatProfile radial_heat_solve(const RadialManifold& man, double s, double R, int n,
                              const HeatSolveOptions& opts = {});

// Weighted inner product of two radial profiles on the same grid.
double radial_inner(const RadialManifold& man, const HeatProfile& a, const HeatProfile& b);

struct KernelSup {
    double value = 0.0;
    Provenance provenance = Provenance::ClosedForm;
};

// sup_y p_s(x, y); pole-based, valid for the homogeneous fixtures where the
// kernel is largest on the diagonal.
KernelSup kernel_sup(const RadialManifold& man, double s);
KernelSup kernel_sup(const RadialManifold& man, double s, const HeatProfile& solved);

// a * vol^{-1} * exp(b * (-ricci_lower)): configured majorant for the
// diagonal kernel at s = 1 in terms of the unit-ball volume and the negative
// part of the Ricci lower bound; (a, b) are configuration inputs, not derived.
double volume_upper_bound(int m, double ricci_lower, double ball_vol_1, double a, double b);
// Heuristic defaults for (a, b); provenance is always "configured".
void volume_upper_defaults(int m, double* a, double* b);

}  // namespace metriclab
