#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobocal {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SobocalError : std::runtime_error {
    explicit SobocalError(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* kind() const { return "SobocalError"; }
};

#define SOBOCAL_ERROR(NAME)                                              \
    struct NAME : SobocalError {                                         \
        explicit NAME(const std::string& msg) : SobocalError(msg) {}     \
        const char* kind() const override { return #NAME; }              \
    }

SOBOCAL_ERROR(NotPositiveDefinite);
SOBOCAL_ERROR(UnsupportedSmoothness);
SOBOCAL_ERROR(InvalidExponent);
SOBOCAL_ERROR(MissingBasis);
SOBOCAL_ERROR(RankDeficientBasis);
SOBOCAL_ERROR(ShapeError);
SOBOCAL_ERROR(UnsupportedOrder);
SOBOCAL_ERROR(SelectionFailed);
SOBOCAL_ERROR(OptimizationFailed);
SOBOCAL_ERROR(ModelEvaluationError);
SOBOCAL_ERROR(SingularInformation);
SOBOCAL_ERROR(StudyFailed);
SOBOCAL_ERROR(IoError);
SOBOCAL_ERROR(ConfigError);

#undef SOBOCAL_ERROR

uint64_t splitmix64(uint64_t x);

// Deterministic seed derivation: chain-mixes the tag words into the master
// seed so per-trial / per-purpose streams never collide or depend on order
// of execution.
uint64_t derive_seed(uint64_t master, uint64_t tag_a, uint64_t tag_b = 0);

// All randomness goes through this wrapper. The engine (mt19937_64) is fully
// specified by the standard and the transforms below are hand-rolled, so
// streams are identical across platforms/stdlibs.
class Rng {
public:
    explicit Rng(uint64_t seed);

    double uniform();                     // [0, 1)
    double uniform(double lo, double hi);
    double normal();                      // standard normal
    VectorXd uniform_vec(int n, double lo = 0.0, double hi = 1.0);
    VectorXd normal_vec(int n);
    // Fisher-Yates permutation of 0..n-1
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

double normal_quantile(double p);  // inverse standard normal CDF, |err| < 1e-8
double normal_cdf(double x);

double mean(const VectorXd& v);
double sample_sd(const VectorXd& v);  // ddof = 1
double median(std::vector<double> v);
// linear-interpolation quantile of unsorted values, p in [0,1]
double quantile(std::vector<double> v, double p);

VectorXd linspace(double a, double b, int n);
VectorXd midpoint_grid(int m);  // (i + 0.5) / m on [0, 1]

double trapezoid(const VectorXd& y, double h);
// second-order finite-difference derivative on an equispaced grid
// (central interior, one-sided at the ends)
VectorXd gradient_order2(const VectorXd& y, double h);

struct Minimize1dResult {
    double x = 0.0;
    double value = 0.0;
    int evals = 0;
};

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-9);
// coarse grid scan followed by golden-section refinement of the best bracket
Minimize1dResult minimize_grid_golden(const std::function<double(double)>& f,
                                      double lo, double hi, int ngrid = 201,
                                      double tol = 1e-9);

}  // namespace sobocal
