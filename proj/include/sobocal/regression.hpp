#pragma once

#include <optional>

#include "sobocal/kernels.hpp"

namespace sobocal {

struct Dataset {
    MatrixXd x;  // n x d
    VectorXd y;
    std::optional<double> noise_variance;
    uint64_t seed = 0;

    int n() const { return static_cast<int>(x.rows()); }
    int d() const { return static_cast<int>(x.cols()); }
    void validate() const;

    static Dataset from_columns(const VectorXd& x1, const VectorXd& y);
};

enum class SurfaceKind { KRR, GPPosterior };

// Fitted estimate of the physical process. KRR predicts r(x)^T (R + n*lam*I)^{-1} y;
// the GP posterior mean is r1(x)^T (R1 + mu*I)^{-1} y with pointwise variance
// scale * (K(x,x) - r1(x)^T (R1 + mu*I)^{-1} r1(x)).
struct SurfaceModel {
    SurfaceKind kind = SurfaceKind::KRR;
    KernelSpec kernel;
    VectorXd coefficients;
    double regularizer = 0.0;   // lambda (KRR) or mu (GP)
    MatrixXd train_x;
    double rkhs_norm = 0.0;
    double variance_scale = 1.0;  // GP prior amplitude
    CholFactor factor;            // of R + n*lam*I or R + mu*I

    double predict(double x) const;
    VectorXd predict(const VectorXd& xs) const;
    double predict_row(const Eigen::RowVectorXd& x) const;
    // GP only; clamped at zero after a -1e-10 tolerance
    double posterior_variance(double x) const;
    VectorXd posterior_variance(const VectorXd& xs) const;
};

SurfaceModel fit_krr(const Dataset& data, const KernelSpec& kernel, double lambda);

std::vector<double> default_lambda_grid();  // 30 log-spaced in [1e-8, 1]
// GCV(lam) = (1/n)||(I-A)y||^2 / [(1/n) tr(I-A)]^2, ties toward larger lam
double gcv_select_lambda(const Dataset& data, const KernelSpec& kernel,
                         const std::vector<double>& lambda_grid);

SurfaceModel gp_posterior(const Dataset& data, const KernelSpec& kernel, double mu,
                          double variance_scale = 1.0);

std::vector<double> default_mu_grid();  // 30 log-spaced in [1e-3, 10]
// seeded train/holdout split; returns the mu minimizing validation MSE
double select_mu_validation(const Dataset& data, const KernelSpec& kernel,
                            const std::vector<double>& mu_grid,
                            double holdout_fraction, uint64_t split_seed);

// mean_fn(grid) + L z with L L^T = variance * K(grid,grid) (+jitter);
// linear interpolation defines the path off-grid
VectorXd sample_gp_path(const KernelSpec& kernel,
                        const std::function<double(double)>& mean_fn,
                        const VectorXd& grid, double variance, uint64_t seed);

double interp_linear(const VectorXd& grid, const VectorXd& values, double x);

// fallback noise estimate: mean squared KRR residual inflated by tr(I-A)/n
double estimate_sigma2(const Dataset& data, const KernelSpec& kernel, double lambda);

}  // namespace sobocal
