#pragma once

#include "sobocal/spectral.hpp"

namespace sobocal {

enum class NormMode { EmpiricalL2, RkhsInterp, SobolevInteger };

// Norm-squared of a function known pointwise on a frozen design.
// RkhsInterp solves g^T R^{-1} g through the Cholesky factor of the design
// kernel matrix. For power kernels the design is the decomposition grid and
// the same quantity is evaluated in the eigenbasis, where R is diagonal —
// sum_j c_j^2 / ev_j^beta with c_j the quadrature coefficients — which avoids
// factorizing a numerically rank-deficient matrix.
class NormSpace {
public:
    static NormSpace rkhs(const KernelSpec& kernel, const VectorXd& design);
    static NormSpace l2(const VectorXd& design);

    double norm_sq(const VectorXd& values) const;
    const VectorXd& design_points() const { return design_; }
    NormMode mode() const { return mode_; }
    const KernelSpec& kernel() const { return kernel_; }
    double jitter() const { return jitter_; }

private:
    NormSpace() = default;
    NormMode mode_ = NormMode::EmpiricalL2;
    KernelSpec kernel_;
    VectorXd design_;
    CholFactor factor_;
    double jitter_ = 0.0;
    // spectral route (power kernels)
    bool spectral_ = false;
    MatrixXd proj_;        // M x N eigenfunction values at the grid
    VectorXd ev_beta_;     // eigenvalues^beta
    double quad_weight_ = 0.0;
};

// sum_{k<=m} int (f^(k))^2 over an equispaced grid (>= 200 points), with
// order-2 difference stencils; m in {0, 1, 2}
double sobolev_integer_norm_sq(const std::function<double(double)>& f, int m,
                               const VectorXd& grid);
double sobolev_integer_norm_sq(const VectorXd& values, int m, const VectorXd& grid);

// max over the probe grid of sqrt(K(x,x) - K(x, nearest design point)):
// a power-function style certificate of interpolation quality
double interpolant_norm_bound(const NormSpace& space, const VectorXd& probe_grid);

}  // namespace sobocal
