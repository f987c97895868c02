#pragma once

#include "sobocal/models.hpp"
#include "sobocal/uq.hpp"

namespace sobocal {

// One Monte Carlo study cell: a model, a calibration mode, a noise level.
struct StudyConfig {
    std::string model = "example_c3";
    CalibMode mode = CalibMode::Sobolev;
    int trials = 100;
    int n = 200;
    double sigma2 = 0.05;
    uint64_t seed = 1;

    double sobolev_m = 1.0;     // order label of the Sobolev objective
    double design_gamma = 1.0;  // length scale of the Sobolev norm kernel
    double lambda_scale = -1.0;  // <0: per-mode default
    double lambda_fixed = -1.0;  // >0: skip GCV, use this regularizer
    int norm_design_size = 300;
    int norm_design_count = 3;
    int ko_design_size = 0;  // 0: 30 for example1, 12 otherwise
    double ko_m = 2.0;
    double ko_gamma = 1.7320508075688772;  // sqrt(3)
    int grid_points = 201;
    int example1_reading = 0;
    MatrixXd bounds;  // 0x0: model default
    int threads = 0;  // 0: SOBOCAL_THREADS, else 1

    // GP-truth protocol (example2)
    int path_grid = 1000;
    int mu_select_size = 300;
    double mu_holdout = 0.3;

    // dense reference design for true-parameter scans
    int ref_grid = 1000;

    UQConfig uq;
};

double default_lambda_scale(CalibMode mode);  // Sobolev 0.3, L2/KO 1.0
int resolve_threads(int requested);           // SOBOCAL_THREADS fallback

struct TrialRecord {
    int trial = 0;
    bool ok = false;
    std::string error;
    double theta = 0.0;
    double objective = 0.0;
    double lambda = 0.0;     // KRR regularizer actually used
    double mu = 0.0;         // GP-truth protocol
    double theta_star = 0.0; // per-path target (GP truth)
    double sq_error = 0.0;   // (theta - theta_star)^2
    // coverage studies
    double se = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    bool ci_covered = false;
    double band_coverage = 0.0;
};

struct StudySummary {
    StudyConfig config;
    int completed = 0, failures = 0;
    double mean_theta = 0.0, sd_theta = 0.0, median_theta = 0.0;
    bool sd_degenerate = false;  // fewer than 2 completed trials
    double mse = 0.0;            // vs per-trial theta_star (GP truth)
    double median_mu = 0.0;
    std::vector<TrialRecord> trials;
};

// Tables 1 / 2 / C.1 style cell; dispatches on the model's truth type
StudySummary run_study(const StudyConfig& config);

struct CoverageSummary {
    StudyConfig config;
    int completed = 0, failures = 0;
    double theta_star = 0.0;
    double ci_coverage = 0.0;
    double band_coverage = 0.0;
    double median_ci_length = 0.0;
    double mean_interval_score = 0.0;
    std::vector<TrialRecord> trials;
};

// Tables 3-4 style experiment: per-trial CI for theta and model band
CoverageSummary run_coverage(const StudyConfig& config);

struct ScaleRow {
    double gamma = 0.0;
    double theta_star = 0.0;
    double mean_theta = 0.0, sd_theta = 0.0;
    double rkhs_norm = 0.0;  // of the discrepancy at the mean estimate
    double w1_norm = 0.0;    // integer-order Sobolev norm of the same
};

// Table 5 style sweep over norm length scales
std::vector<ScaleRow> run_scale_study(const StudyConfig& config,
                                      const std::vector<double>& gammas);

}  // namespace sobocal
