#pragma once

#include "sobocal/kernels.hpp"

namespace sobocal {

// Benchmark physical processes / computer models used by the studies.
struct ExperimentModel {
    std::string name;
    std::function<double(double)> f_p;  // exact truth (GP examples: prior mean)
    bool gp_truth = false;
    double gp_variance = 0.0;
    KernelSpec gp_kernel;
    std::function<double(double, const VectorXd&)> f_s;
    std::function<VectorXd(double, const VectorXd&)> grad_fs;  // may be empty
    MatrixXd bounds;  // q x 2
    int q = 1;
    double sigma2_default = 0.05;
};

double physical_truth_main(double x);  // exp(pi x / 5) sin(2 pi x)

// oscillatory-discrepancy model; `reading` selects between the two plausible
// parses of its printed formula (0 is the default that yields theta* near 1.3)
double example1(double x, double theta, int reading = 0);
double example1_grad(double x, double theta);  // reading 0

// shared discrepancy form of the second benchmark and its deterministic analog
double example_c3(double x, double theta);
double example_c3_grad(double x, double theta);

// Markov ion-channel model: x is log-time, f_s = e_1^T exp(exp(x) A(theta)) e_4
Eigen::Matrix4d ion_channel_A(const VectorXd& theta);
double ion_channel(double log_time, const VectorXd& theta);

// order-6 Pade approximant with scaling-and-squaring
MatrixXd expm_pade6(const MatrixXd& a);

ExperimentModel get_model(const std::string& name, int example1_reading = 0);

}  // namespace sobocal
