#pragma once

#include <memory>

#include "sobocal/common.hpp"

namespace sobocal {

struct EigenBasis;  // spectral.hpp

enum class KernelFamily { MaternHalfInteger, PowerKernel };

// A kernel family instance. `m` is the Sobolev exponent of the generated
// space; for the Matern family the closed-form order is nu = m - d/2.
// Power kernels are the beta-th spectral power of a decomposed base kernel.
struct KernelSpec {
    KernelFamily family = KernelFamily::MaternHalfInteger;
    double m = 1.0;
    int d = 1;
    double gamma = 1.0;  // length scale, r = gamma * ||x - y||_2
    std::shared_ptr<const EigenBasis> power_base;
    double beta = 1.0;

    double nu() const { return m - d / 2.0; }

    static KernelSpec matern(double m, double gamma = 1.0, int d = 1);
    static KernelSpec matern_nu(double nu, double gamma = 1.0, int d = 1);
    static KernelSpec power(std::shared_ptr<const EigenBasis> base, double beta);

    void validate() const;
    std::string describe() const;
};

// closed-form Matern correlation at scaled distance r = gamma * ||x-y||
double matern_scalar(double r, double nu);

double matern_eval(double x, double y, const KernelSpec& spec);
double matern_eval(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                   const KernelSpec& spec);

// truncated beta-power kernel via the Nystrom-extended eigenfunctions of the base
double power_kernel_eval(double x, double y, const KernelSpec& spec);

// dispatch on family (d = 1 points)
double kernel_eval(double x, double y, const KernelSpec& spec);

struct KernelMatrix {
    MatrixXd values;
    double jitter = 0.0;
};

// rows of `points` are inputs; d = 1 callers can pass a column vector
KernelMatrix kernel_matrix(const MatrixXd& points, const KernelSpec& spec,
                           double jitter = 0.0);
KernelMatrix kernel_matrix(const VectorXd& points, const KernelSpec& spec,
                           double jitter = 0.0);

MatrixXd kernel_cross(const MatrixXd& a, const MatrixXd& b, const KernelSpec& spec);
MatrixXd kernel_cross(const VectorXd& a, const VectorXd& b, const KernelSpec& spec);

struct CholFactor {
    MatrixXd L;          // lower-triangular factor of (A + jitter * I)
    double jitter = 0.0;

    // solve L z = g
    VectorXd half_solve(const VectorXd& g) const;
    MatrixXd half_solve(const MatrixXd& g) const;
    VectorXd solve(const VectorXd& g) const;  // (L L^T)^{-1} g
    MatrixXd solve(const MatrixXd& g) const;
};

// Cholesky with escalating diagonal jitter: start at `j0`, multiply by 10 up
// to `jmax`; throws NotPositiveDefinite beyond that.
CholFactor chol_jitter(const MatrixXd& a, double j0 = 1e-10, double jmax = 1e-6);

}  // namespace sobocal
