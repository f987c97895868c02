#pragma once

#include "sobocal/kernels.hpp"

namespace sobocal {

// Nystrom spectral decomposition of a kernel on a uniform quadrature grid.
// eigfun holds eigenfunction values at the grid (unit L2(Omega) quadrature
// norm); coeffs extends them anywhere: e_j(x) = sum_i K(x, grid_i) coeffs(i,j).
struct EigenBasis {
    VectorXd grid;         // M quadrature points
    double weight = 0.0;   // vol(Omega)/M
    VectorXd eigenvalues;  // N operator eigenvalues, descending
    MatrixXd eigfun;       // M x N
    MatrixXd coeffs;       // M x N
    KernelSpec base_spec;

    int M() const { return static_cast<int>(grid.size()); }
    int N() const { return static_cast<int>(eigenvalues.size()); }
};

// clamp_rank: instead of throwing when fewer than N eigenvalues clear the
// positivity floor, keep however many do.
EigenBasis nystrom_decompose(const KernelSpec& spec, int M, int N,
                             bool clamp_rank = false);

// eigenfunction values at arbitrary points, P x N
MatrixXd nystrom_extend(const EigenBasis& basis, const VectorXd& points);
VectorXd nystrom_extend_point(const EigenBasis& basis, double x);

// mean over test points of |K(s,s) - sum_{j<=N} ev_j e_j(s)^2|
double eigen_truncation_error(const EigenBasis& basis, const VectorXd& test_points);

// basis sizes used for the reference truncation table (overridable per call
// site): m = 7/8 -> 20, 1 -> 12, 9/8 -> 12, 9/5 -> 5, 2 -> 5.
int truncation_default_N(double m);

// length-scale convention that reproduces the reference truncation table:
// the standard Matern scaling at order m + 1/2.
double truncation_table_gamma(double m);

// process-wide memoized decomposition keyed by (family, m, gamma, M, N)
std::shared_ptr<const EigenBasis> cached_basis(const KernelSpec& spec, int M, int N);

}  // namespace sobocal
