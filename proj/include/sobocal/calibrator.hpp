#pragma once

#include "sobocal/norm_engine.hpp"

namespace sobocal {

enum class CalibMode { Sobolev, L2, KO };

std::string calib_mode_name(CalibMode mode);
CalibMode calib_mode_from_name(const std::string& name);

// Discrepancy-minimization problem: find theta minimizing the norm of
// f_phat - f_s(., theta) over the ensemble of frozen norm spaces (the
// objective is the mean of the per-space norms).
struct CalibrationProblem {
    std::function<double(double)> f_phat;                        // physical estimate
    std::function<double(double, const VectorXd&)> f_s;          // computer model
    MatrixXd bounds;                                             // q x 2
    std::vector<NormSpace> spaces;
    CalibMode mode = CalibMode::Sobolev;
    double m = 1.0;  // Sobolev order label

    int q() const { return static_cast<int>(bounds.rows()); }
    void validate() const;
};

struct OptimizerConfig {
    int grid_points = 201;       // 1-d coarse scan
    double golden_tol = 1e-9;
    int multistarts = 5;         // Nelder-Mead starts for q > 1
    int max_iterations = 500;
    double simplex_tol = 1e-6;
    uint64_t seed = 0;
};

struct CalibrationResult {
    VectorXd theta;
    double objective = 0.0;
    CalibMode mode = CalibMode::Sobolev;
    int evaluations = 0;
    int restarts = 0;
    bool converged = false;
};

// Precomputes f_phat on every design once; theta-dependent work is only the
// computer-model sweep plus the norm solves.
class PreparedObjective {
public:
    explicit PreparedObjective(const CalibrationProblem& problem);
    double operator()(const VectorXd& theta) const;
    double operator()(double theta) const;  // q = 1 convenience
    const CalibrationProblem& problem() const { return *problem_; }

private:
    const CalibrationProblem* problem_;
    std::vector<VectorXd> fphat_values_;
};

double calib_objective(const VectorXd& theta, const CalibrationProblem& problem);

CalibrationResult calibrate(const CalibrationProblem& problem,
                            const OptimizerConfig& config = {});

// same objective with the exact truth substituted; denser 1-d scan
VectorXd true_parameter(const CalibrationProblem& problem_with_exact_fp,
                        const OptimizerConfig& config = {});

// generic Nelder-Mead on a box (used for q > 1); evaluations clamp to bounds
struct NelderMeadResult {
    VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};
NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                             const VectorXd& start, const MatrixXd& bounds,
                             double simplex_tol, int max_iterations);

// maximin-free seeded Latin hypercube over the box, k points
MatrixXd latin_hypercube(const MatrixXd& bounds, int k, uint64_t seed);

}  // namespace sobocal
