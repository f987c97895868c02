#pragma once

#include "sobocal/calibrator.hpp"
#include "sobocal/regression.hpp"
#include "sobocal/spectral.hpp"

namespace sobocal {

struct UQConfig {
    int basis_n = 12;     // spectral truncation of the information integral
    int basis_m = 1000;   // quadrature resolution for it
    double basis_gamma = 1.0;
    double hessian_step = 1e-3;   // relative, h = step*(1+|theta_k|)
    double fd_theta_step = 1e-5;  // model-gradient fallback, same scaling
    double level = 0.95;
    int draws = 100;
    int band_grid = 100;
    std::uint64_t seed = 1;  // only used for q>1 band draws
};

struct UQReport {
    VectorXd theta;
    MatrixXd vmat;        // curvature of the squared-norm objective
    MatrixXd wmat;        // truncated information integral
    MatrixXd covariance;  // 4 sigma^2 V^-1 W V^-1 / n
    VectorXd se;
    MatrixXd ci;  // q x 2
    double sigma2 = 0.0;
    double level = 0.95;
    int n = 0;
    VectorXd band_x, fs_lower, fs_upper, fp_lower, fp_upper;  // empty if not requested
};

// central second differences; h_k = step*(1+|theta_k|)
MatrixXd curvature_matrix(const std::function<double(const VectorXd&)>& f, const VectorXd& theta,
                          double step = 1e-3);

// W = sum_{j<=N} ev_j^-2 a_j a_j^T, a_j = integral of (d f_s / d theta) phi_j
MatrixXd information_matrix(const std::function<double(double, const VectorXd&)>& f_s,
                            const std::function<VectorXd(double, const VectorXd&)>& grad_fs,
                            const VectorXd& theta, const EigenBasis& basis,
                            double fd_step = 1e-5);

MatrixXd theta_covariance(const MatrixXd& vmat, const MatrixXd& wmat, double sigma2, int n);

// theta_i = theta + sd * Phi^-1((i-0.5)/draws), low to high
VectorXd stratified_normal_draws(double theta, double sd, int draws);

// per-column quantile across rows (rows = draws)
VectorXd pointwise_quantile(const MatrixXd& values, double p);

struct UQInputs {
    std::function<double(const VectorXd&)> objective;
    std::function<double(double, const VectorXd&)> f_s;
    std::function<VectorXd(double, const VectorXd&)> grad_fs;  // optional
    VectorXd theta;
    double sigma2 = 0.0;
    int n = 0;
    UQConfig config;
    const Dataset* data = nullptr;  // enables the truth band
};

UQReport uq_report(const UQInputs& in);

// (u-l) + 2/(1-level) * (shortfall below l + excess above u)
double interval_score(double lower, double upper, double truth, double level = 0.95);

}  // namespace sobocal
