// Command-line front end: calibrate, study, uq, eigen, scale-study.
#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sobocal/io.hpp"
#include "sobocal/simharness.hpp"

namespace sobocal {
namespace {

// Binds config keys so that: every key is a flag with its default in --help,
// a JSON config file can set any key, and explicit flags win over the file.
template <typename T>
struct is_vector : std::false_type {};
template <typename U>
struct is_vector<std::vector<U>> : std::true_type {};

class CliConfig {
public:
    void attach(CLI::App* sub) {
        sub_ = sub;
        sub->add_option("--config", config_path_, "JSON config file (flags override its keys)");
    }

    template <typename T>
    void add(T& ref, const std::string& key, const std::string& desc) {
        auto* opt = sub_->add_option("--" + key, ref, desc)->capture_default_str();
        if constexpr (is_vector<T>::value) opt->delimiter(',');
        setters_[key] = [&ref](const json& v) { ref = v.get<T>(); };
        getters_[key] = [&ref]() { return json(ref); };
    }

    void add_flag(bool& ref, const std::string& key, const std::string& desc) {
        sub_->add_flag("--" + key, ref, desc);
        setters_[key] = [&ref](const json& v) { ref = v.get<bool>(); };
        getters_[key] = [&ref]() { return json(ref); };
    }

    // overlay the config file (if any) and return the resolved snapshot
    json finalize() {
        if (!config_path_.empty()) {
            const json j = load_json_file(config_path_);
            if (!j.is_object()) throw ConfigError(config_path_ + ": config must be a JSON object");
            for (const auto& [k, v] : j.items()) {
                const auto it = setters_.find(k);
                if (it == setters_.end()) throw ConfigError("unknown config key '" + k + "'");
                if (sub_->count("--" + k) == 0) {
                    try {
                        it->second(v);
                    } catch (const json::exception& e) {
                        throw ConfigError("config key '" + k + "': " + e.what());
                    }
                }
            }
        }
        json snap;
        for (const auto& [k, g] : getters_) snap[k] = g();
        return snap;
    }

    const std::string& config_path() const { return config_path_; }

private:
    CLI::App* sub_ = nullptr;
    std::string config_path_;
    std::map<std::string, std::function<void(const json&)>> setters_;
    std::map<std::string, std::function<json()>> getters_;
};

std::string out_path(const std::string& dir, const std::string& name, bool force) {
    std::filesystem::create_directories(dir);
    const std::string p = dir + "/" + name;
    if (!force && std::filesystem::exists(p))
        throw IoError("output '" + p + "' exists; pass --force to overwrite");
    return p;
}

MatrixXd bounds_from_flat(const std::vector<double>& flat, const MatrixXd& fallback) {
    if (flat.empty()) return fallback;
    if (flat.size() % 2 != 0) throw ConfigError("bounds must be lo,hi pairs");
    MatrixXd b(flat.size() / 2, 2);
    for (size_t k = 0; k + 1 < flat.size(); k += 2) {
        b((Index)(k / 2), 0) = flat[k];
        b((Index)(k / 2), 1) = flat[k + 1];
    }
    return b;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOpts {
    std::string data;
    std::string model = "example_c3";
    std::string mode = "sobolev";
    double m = 1.0;
    double gamma = 1.0;
    double ko_m = 2.0;
    double ko_gamma = 1.7320508075688772;
    int design_size = 300;
    int design_count = 3;
    int ko_design_size = 0;
    double domain_lo = 0.0, domain_hi = 1.0;
    double lambda = -1.0;        // <0: GCV
    double lambda_scale = -1.0;  // <0: per-mode default
    int power_basis_m = 1000;
    int power_basis_n = 100;
    int grid_points = 201;
    int example1_reading = 0;
    std::vector<double> bounds;  // lo,hi per coordinate
    uint64_t seed = 1;
    std::string out = "out";
    bool force = false;
};

void bind_calibrate(CliConfig& cc, CalibrateOpts& o) {
    cc.add(o.data, "data", "dataset CSV (header x1,...,xd,y)");
    cc.add(o.model, "model", "computer model: example1 | example2 | example_c3 | ion_channel");
    cc.add(o.mode, "mode", "sobolev | l2 | ko");
    cc.add(o.m, "m", "Sobolev order of the norm (0 = empirical L2; fractional uses power kernels)");
    cc.add(o.gamma, "gamma", "length scale of the Sobolev norm kernel");
    cc.add(o.ko_m, "ko_m", "order of the KO space");
    cc.add(o.ko_gamma, "ko_gamma", "length scale of the KO kernel");
    cc.add(o.design_size, "design_size", "points per norm design");
    cc.add(o.design_count, "design_count", "independent norm designs averaged in the objective");
    cc.add(o.ko_design_size, "ko_design_size", "KO design size (0: 30 for example1, 12 otherwise)");
    cc.add(o.domain_lo, "domain_lo", "input domain lower end for norm designs");
    cc.add(o.domain_hi, "domain_hi", "input domain upper end for norm designs");
    cc.add(o.lambda, "lambda", "KRR regularizer (<0: generalized cross-validation)");
    cc.add(o.lambda_scale, "lambda_scale", "multiplier on the GCV choice (<0: 0.3 sobolev, 1 otherwise)");
    cc.add(o.power_basis_m, "power_basis_m", "quadrature size of the power-kernel eigenbasis");
    cc.add(o.power_basis_n, "power_basis_n", "truncation of the power-kernel eigenbasis");
    cc.add(o.grid_points, "grid_points", "coarse-scan resolution of the optimizer");
    cc.add(o.example1_reading, "example1_reading", "formula reading for example1 (0 or 1)");
    cc.add(o.bounds, "bounds", "parameter box lo,hi[,lo,hi...] (empty: model default)");
    cc.add(o.seed, "seed", "master seed (norm designs)");
    cc.add(o.out, "out", "output directory");
    cc.add_flag(o.force, "force", "overwrite existing outputs");
}

struct CalibPipeline {
    Dataset data;
    std::shared_ptr<SurfaceModel> fp;
    double lambda_gcv = 0.0;
    double lambda_used = 0.0;
    ExperimentModel model;
    CalibrationProblem prob;
    CalibrationResult res;
};

CalibPipeline run_calibrate_pipeline(const CalibrateOpts& o) {
    if (o.data.empty()) throw ConfigError("--data is required");
    CalibPipeline p;
    p.data = read_dataset_csv(o.data);
    if (p.data.d() != 1) throw ConfigError("calibration expects 1-d inputs");
    p.model = get_model(o.model, o.example1_reading);

    const CalibMode mode = calib_mode_from_name(o.mode);
    const KernelSpec fit_kernel = KernelSpec::matern_nu(1.5, 1.0);
    const double scale = o.lambda_scale >= 0.0 ? o.lambda_scale : default_lambda_scale(mode);
    p.lambda_gcv = gcv_select_lambda(p.data, fit_kernel, default_lambda_grid());
    p.lambda_used = o.lambda >= 0.0 ? o.lambda : p.lambda_gcv * scale;
    p.fp = std::make_shared<SurfaceModel>(fit_krr(p.data, fit_kernel, p.lambda_used));

    const bool integer_m = std::fabs(o.m - std::round(o.m)) < 1e-12;
    std::vector<NormSpace> spaces;
    if (mode == CalibMode::Sobolev && o.m > 0.0 && !integer_m) {
        // fractional order: beta-power of the order-2 Matern base on [0,1]
        const auto base = cached_basis(KernelSpec::matern(2.0, o.gamma), o.power_basis_m,
                                       o.power_basis_n);
        spaces.push_back(NormSpace::rkhs(KernelSpec::power(base, o.m / 2.0), base->grid));
    } else {
        Rng rng(derive_seed(o.seed, 0xde51c0deULL));
        const bool ko = mode == CalibMode::KO;
        const int size = ko ? (o.ko_design_size > 0 ? o.ko_design_size
                                                    : (o.model == "example1" ? 30 : 12))
                            : o.design_size;
        for (int k = 0; k < o.design_count; ++k) {
            VectorXd dz = rng.uniform_vec(size, o.domain_lo, o.domain_hi);
            std::sort(dz.begin(), dz.end());
            if (ko)
                spaces.push_back(NormSpace::rkhs(KernelSpec::matern(o.ko_m, o.ko_gamma), dz));
            else if (mode == CalibMode::L2 || o.m == 0.0)
                spaces.push_back(NormSpace::l2(dz));
            else
                spaces.push_back(NormSpace::rkhs(KernelSpec::matern(o.m, o.gamma), dz));
        }
    }

    auto fp = p.fp;
    p.prob.f_phat = [fp](double x) { return fp->predict(x); };
    p.prob.f_s = p.model.f_s;
    p.prob.bounds = bounds_from_flat(o.bounds, p.model.bounds);
    p.prob.spaces = std::move(spaces);
    p.prob.mode = mode;
    p.prob.m = o.m;

    OptimizerConfig oc;
    oc.grid_points = o.grid_points;
    oc.seed = derive_seed(o.seed, 0x0b7a1ULL);
    p.res = calibrate(p.prob, oc);
    return p;
}

json calibration_json(const CalibPipeline& p) {
    json j;
    j["theta"] = std::vector<double>(p.res.theta.data(), p.res.theta.data() + p.res.theta.size());
    j["objective"] = p.res.objective;
    j["mode"] = calib_mode_name(p.res.mode);
    j["m"] = p.prob.m;
    j["evaluations"] = p.res.evaluations;
    j["restarts"] = p.res.restarts;
    j["converged"] = p.res.converged;
    j["lambda_gcv"] = p.lambda_gcv;
    j["lambda"] = p.lambda_used;
    j["n"] = p.data.n();
    return j;
}

int cmd_calibrate(const CalibrateOpts& o, const json& snapshot, const std::string& config_path) {
    const json manifest = make_manifest("calibrate", config_path, snapshot, o.seed, o.out);
    write_json_file(out_path(o.out, "manifest.json", o.force), manifest);

    const CalibPipeline p = run_calibrate_pipeline(o);

    json result = calibration_json(p);
    result["manifest"] = manifest;
    write_json_file(out_path(o.out, "calibration.json", o.force), result);

    // per-coordinate objective profiles through the optimum
    const PreparedObjective prep(p.prob);
    const int q = p.prob.q();
    MatrixXd rows((Index)o.grid_points * q, 3);
    Index r = 0;
    for (int k = 0; k < q; ++k) {
        const VectorXd grid =
            linspace(p.prob.bounds(k, 0), p.prob.bounds(k, 1), o.grid_points);
        VectorXd th = p.res.theta;
        for (int i = 0; i < o.grid_points; ++i, ++r) {
            th[k] = grid[i];
            rows(r, 0) = k;
            rows(r, 1) = grid[i];
            rows(r, 2) = prep(th);
        }
    }
    write_csv(out_path(o.out, "profile.csv", o.force), {"coord", "theta", "objective"}, rows,
              manifest_comments(manifest));
    return p.res.converged ? 0 : 2;
}

// ----------------------------------------------------------------------- uq

struct UqOpts {
    CalibrateOpts cal;  // the calibration being quantified
    double sigma2 = -1.0;  // <0: estimate from residuals
    double level = 0.95;
    int draws = 100;
    int band_grid = 100;
    int basis_n = 12;
    int basis_m = 1000;
    double hessian_step = 1e-3;
    double fd_theta_step = 1e-5;
};

void bind_uq(CliConfig& cc, UqOpts& o) {
    bind_calibrate(cc, o.cal);
    cc.add(o.sigma2, "sigma2", "noise variance (<0: estimate from KRR residuals)");
    cc.add(o.level, "level", "confidence level");
    cc.add(o.draws, "draws", "parameter draws for the bands");
    cc.add(o.band_grid, "band_grid", "grid size of the bands");
    cc.add(o.basis_n, "basis_n", "truncation of the information integral");
    cc.add(o.basis_m, "basis_m", "quadrature size of the information integral");
    cc.add(o.hessian_step, "hessian_step", "relative curvature step");
    cc.add(o.fd_theta_step, "fd_theta_step", "relative model-gradient step");
}

int cmd_uq(const UqOpts& o, const json& snapshot, const std::string& config_path) {
    const json manifest = make_manifest("uq", config_path, snapshot, o.cal.seed, o.cal.out);
    write_json_file(out_path(o.cal.out, "manifest.json", o.cal.force), manifest);

    const CalibPipeline p = run_calibrate_pipeline(o.cal);
    const PreparedObjective prep(p.prob);

    UQInputs in;
    in.objective = [&prep](const VectorXd& th) { return prep(th); };
    in.f_s = p.model.f_s;
    in.grad_fs = p.model.grad_fs;
    in.theta = p.res.theta;
    in.sigma2 = o.sigma2 >= 0.0
                    ? o.sigma2
                    : estimate_sigma2(p.data, KernelSpec::matern_nu(1.5, 1.0), p.lambda_gcv);
    in.n = p.data.n();
    in.data = &p.data;
    in.config.level = o.level;
    in.config.draws = o.draws;
    in.config.band_grid = o.band_grid;
    in.config.basis_n = o.basis_n;
    in.config.basis_m = o.basis_m;
    in.config.hessian_step = o.hessian_step;
    in.config.fd_theta_step = o.fd_theta_step;
    in.config.seed = derive_seed(o.cal.seed, 0x00afULL);
    const UQReport rep = uq_report(in);

    json j = calibration_json(p);
    j["sigma2"] = rep.sigma2;
    j["level"] = rep.level;
    j["se"] = std::vector<double>(rep.se.data(), rep.se.data() + rep.se.size());
    std::vector<std::vector<double>> ci;
    for (Index k = 0; k < rep.ci.rows(); ++k) ci.push_back({rep.ci(k, 0), rep.ci(k, 1)});
    j["ci"] = ci;
    std::vector<std::vector<double>> vm, wm, cov;
    for (Index a = 0; a < rep.vmat.rows(); ++a) {
        vm.push_back({});
        wm.push_back({});
        cov.push_back({});
        for (Index b = 0; b < rep.vmat.cols(); ++b) {
            vm[a].push_back(rep.vmat(a, b));
            wm[a].push_back(rep.wmat(a, b));
            cov[a].push_back(rep.covariance(a, b));
        }
    }
    j["curvature"] = vm;
    j["information"] = wm;
    j["covariance"] = cov;
    j["manifest"] = manifest;
    write_json_file(out_path(o.cal.out, "uq.json", o.cal.force), j);

    const auto band_rows = [&](const VectorXd& lo, const VectorXd& hi) {
        MatrixXd rows(rep.band_x.size(), 3);
        rows.col(0) = rep.band_x;
        rows.col(1) = lo;
        rows.col(2) = hi;
        return rows;
    };
    const auto comments = manifest_comments(manifest);
    write_csv(out_path(o.cal.out, "bands_fs.csv", o.cal.force), {"x", "lower", "upper"},
              band_rows(rep.fs_lower, rep.fs_upper), comments);
    write_csv(out_path(o.cal.out, "bands_fp.csv", o.cal.force), {"x", "lower", "upper"},
              band_rows(rep.fp_lower, rep.fp_upper), comments);

    std::ostringstream txt;
    txt << "sobocal " << kToolVersion << " uq\n";
    txt << "theta_hat:";
    for (Index k = 0; k < rep.theta.size(); ++k) txt << " " << format_double(rep.theta[k]);
    txt << "\nsigma2: " << format_double(rep.sigma2) << "\nlevel: " << rep.level << "\n";
    for (Index k = 0; k < rep.theta.size(); ++k)
        txt << "ci[" << k << "]: [" << format_double(rep.ci(k, 0)) << ", "
            << format_double(rep.ci(k, 1)) << "]  se " << format_double(rep.se[k]) << "\n";
    std::ofstream os(out_path(o.cal.out, "uq.txt", o.cal.force));
    os << txt.str();
    return 0;
}

// -------------------------------------------------------------------- study

struct StudyOpts {
    StudyConfig sc;
    std::string model = "example_c3";
    std::string modes = "sobolev";          // comma-separated cells
    std::vector<double> sigma2s = {0.05};   // one cell per value
    std::vector<double> bounds;
    bool with_uq = false;  // per-trial CI + band vs theta* (sobolev only)
    std::string out = "out";
    bool force = false;
};

void bind_study(CliConfig& cc, StudyOpts& o) {
    cc.add(o.model, "model", "experiment model");
    cc.add(o.modes, "modes", "comma-separated cells: sobolev,l2,ko");
    cc.add(o.sc.trials, "trials", "Monte Carlo trials per cell");
    cc.add(o.sc.n, "n", "observations per trial");
    cc.add(o.sigma2s, "sigma2", "noise variance(s), one cell per value");
    cc.add(o.sc.seed, "seed", "master seed (per-trial seeds derived from it)");
    cc.add(o.sc.sobolev_m, "m", "Sobolev order (0 = empirical L2)");
    cc.add(o.sc.design_gamma, "gamma", "length scale of the Sobolev norm kernel");
    cc.add(o.sc.lambda_scale, "lambda_scale", "multiplier on the GCV regularizer (<0: per-mode default)");
    cc.add(o.sc.lambda_fixed, "lambda", "fixed KRR regularizer (<=0: generalized cross-validation)");
    cc.add(o.sc.norm_design_size, "design_size", "points per norm design");
    cc.add(o.sc.norm_design_count, "design_count", "independent norm designs averaged in the objective");
    cc.add(o.sc.ko_design_size, "ko_design_size", "KO design size (0: 30 for example1, 12 otherwise)");
    cc.add(o.sc.ko_m, "ko_m", "order of the KO space");
    cc.add(o.sc.ko_gamma, "ko_gamma", "length scale of the KO kernel");
    cc.add(o.sc.grid_points, "grid_points", "coarse-scan resolution of the optimizer");
    cc.add(o.sc.example1_reading, "example1_reading", "formula reading for example1 (0 or 1)");
    cc.add(o.bounds, "bounds", "parameter box lo,hi (empty: model default)");
    cc.add(o.sc.threads, "threads", "parallel trials (0: SOBOCAL_THREADS or 1)");
    cc.add(o.sc.path_grid, "path_grid", "grid size of sampled truth paths (example2)");
    cc.add(o.sc.mu_select_size, "mu_select_size", "sample size of the regularizer-selection set (example2)");
    cc.add(o.sc.mu_holdout, "mu_holdout", "holdout fraction of the selection set (example2)");
    cc.add(o.sc.ref_grid, "ref_grid", "dense design size for true-parameter scans");
    cc.add_flag(o.with_uq, "uq", "per-trial confidence interval and band coverage");
    cc.add(o.sc.uq.level, "level", "confidence level (with --uq)");
    cc.add(o.sc.uq.draws, "draws", "parameter draws for bands (with --uq)");
    cc.add(o.sc.uq.band_grid, "band_grid", "band grid size (with --uq)");
    cc.add(o.sc.uq.basis_n, "basis_n", "truncation of the information integral (with --uq)");
    cc.add(o.sc.uq.basis_m, "basis_m", "quadrature size of the information integral (with --uq)");
    cc.add(o.out, "out", "output directory");
    cc.add_flag(o.force, "force", "overwrite existing outputs");
}

std::vector<CalibMode> parse_modes(const std::string& modes) {
    std::vector<CalibMode> out;
    std::string cur;
    for (char ch : modes + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(calib_mode_from_name(cur));
            cur.clear();
        } else if (!std::isspace((unsigned char)ch)) {
            cur += ch;
        }
    }
    if (out.empty()) throw ConfigError("no calibration modes given");
    return out;
}

double mode_id(CalibMode m) {
    return m == CalibMode::Sobolev ? 0.0 : (m == CalibMode::L2 ? 1.0 : 2.0);
}

int cmd_study(const StudyOpts& o, const json& snapshot, const std::string& config_path) {
    const json manifest = make_manifest("study", config_path, snapshot, o.sc.seed, o.out);
    write_json_file(out_path(o.out, "manifest.json", o.force), manifest);
    const auto comments = manifest_comments(manifest);

    const std::vector<CalibMode> modes = parse_modes(o.modes);
    const std::vector<std::string> sum_header = {
        "mode",          "sigma2",        "trials",           "completed",
        "failures",      "mean_theta",    "sd_theta",         "median_theta",
        "sd_degenerate", "mse",           "median_mu",        "theta_star",
        "ci_coverage",   "band_coverage", "median_ci_length", "mean_interval_score"};
    const std::vector<std::string> tri_header = {
        "mode",  "sigma2", "trial",      "ok",    "theta", "objective",
        "lambda", "mu",    "theta_star", "sq_error", "se",  "ci_lo",
        "ci_hi", "ci_covered", "band_coverage"};

    std::vector<VectorXd> sum_rows, tri_rows;
    std::vector<std::string> errors;
    for (CalibMode mode : modes) {
        for (double s2 : o.sigma2s) {
            StudyConfig c = o.sc;
            c.model = o.model;
            c.mode = mode;
            c.sigma2 = s2;
            c.bounds = bounds_from_flat(o.bounds, MatrixXd());

            VectorXd row = VectorXd::Zero((Index)sum_header.size());
            row[0] = mode_id(mode);
            row[1] = s2;
            row[2] = c.trials;
            const std::vector<TrialRecord>* trials = nullptr;
            StudySummary ss;
            CoverageSummary cs;
            if (o.with_uq) {
                cs = run_coverage(c);
                trials = &cs.trials;
                row[3] = cs.completed;
                row[4] = cs.failures;
                std::vector<double> th;
                for (const auto& t : cs.trials)
                    if (t.ok) th.push_back(t.theta);
                Eigen::Map<const VectorXd> tv(th.data(), (Index)th.size());
                row[5] = mean(tv);
                row[6] = th.size() > 1 ? sample_sd(tv) : 0.0;
                row[7] = median(th);
                row[8] = th.size() < 2 ? 1.0 : 0.0;
                row[11] = cs.theta_star;
                row[12] = cs.ci_coverage;
                row[13] = cs.band_coverage;
                row[14] = cs.median_ci_length;
                row[15] = cs.mean_interval_score;
            } else {
                ss = run_study(c);
                trials = &ss.trials;
                row[3] = ss.completed;
                row[4] = ss.failures;
                row[5] = ss.mean_theta;
                row[6] = ss.sd_theta;
                row[7] = ss.median_theta;
                row[8] = ss.sd_degenerate ? 1.0 : 0.0;
                row[9] = ss.mse;
                row[10] = ss.median_mu;
            }
            sum_rows.push_back(row);

            for (const auto& t : *trials) {
                VectorXd tr((Index)tri_header.size());
                tr << mode_id(mode), s2, t.trial, t.ok ? 1.0 : 0.0, t.theta, t.objective,
                    t.lambda, t.mu, t.theta_star, t.sq_error, t.se, t.ci_lo, t.ci_hi,
                    t.ci_covered ? 1.0 : 0.0, t.band_coverage;
                tri_rows.push_back(tr);
                if (!t.ok)
                    errors.push_back(calib_mode_name(mode) + " sigma2=" + format_double(s2) +
                                     " trial " + std::to_string(t.trial) + ": " + t.error);
            }
        }
    }

    MatrixXd sm((Index)sum_rows.size(), (Index)sum_header.size());
    for (size_t i = 0; i < sum_rows.size(); ++i) sm.row((Index)i) = sum_rows[i];
    MatrixXd tm((Index)tri_rows.size(), (Index)tri_header.size());
    for (size_t i = 0; i < tri_rows.size(); ++i) tm.row((Index)i) = tri_rows[i];
    write_csv(out_path(o.out, "summary.csv", o.force), sum_header, sm, comments);
    write_csv(out_path(o.out, "trials.csv", o.force), tri_header, tm, comments);
    if (!errors.empty()) {
        std::ofstream os(out_path(o.out, "errors.txt", o.force));
        for (const auto& e : errors) os << e << "\n";
    }
    return 0;
}

// -------------------------------------------------------------------- eigen

struct EigenOpts {
    std::vector<double> m_list = {0.875, 1.0, 1.125, 1.8, 2.0};
    std::vector<int> n_list;   // empty: reference defaults per m
    double gamma = -1.0;       // <=0: table convention sqrt(2m+1)
    int quad_m = 1000;
    int test_points = 1000;
    std::string out = "out";
    bool force = false;
    uint64_t seed = 1;  // unused; uniform manifest shape
};

void bind_eigen(CliConfig& cc, EigenOpts& o) {
    cc.add(o.m_list, "m", "Sobolev orders to tabulate");
    cc.add(o.n_list, "N", "truncation points (empty: reference defaults)");
    cc.add(o.gamma, "gamma", "kernel length scale (<=0: sqrt(2m+1) per row)");
    cc.add(o.quad_m, "quad_m", "quadrature grid size of the decomposition");
    cc.add(o.test_points, "test_points", "equispaced test points for the error column");
    cc.add(o.out, "out", "output directory");
    cc.add_flag(o.force, "force", "overwrite existing outputs");
}

int cmd_eigen(const EigenOpts& o, const json& snapshot, const std::string& config_path) {
    const json manifest = make_manifest("eigen", config_path, snapshot, o.seed, o.out);
    write_json_file(out_path(o.out, "manifest.json", o.force), manifest);

    if (!o.n_list.empty() && o.n_list.size() != o.m_list.size())
        throw ConfigError("m and N lists must have equal length");

    const VectorXd test = linspace(0.0, 1.0, o.test_points);
    MatrixXd rows((Index)o.m_list.size(), 4);
    std::vector<VectorXd> ev_rows;  // m, j, eigenvalue
    for (size_t i = 0; i < o.m_list.size(); ++i) {
        const double m = o.m_list[i];
        const int n = o.n_list.empty() ? truncation_default_N(m) : o.n_list[i];
        const double g = o.gamma > 0.0 ? o.gamma : truncation_table_gamma(m);
        const double nu = m - 0.5;
        const bool closed = std::fabs(nu - 0.5) < 1e-9 || std::fabs(nu - 1.5) < 1e-9 ||
                            std::fabs(nu - 2.5) < 1e-9;
        double err;
        VectorXd evs;
        if (closed) {
            const EigenBasis basis = nystrom_decompose(KernelSpec::matern(m, g), o.quad_m, n);
            err = eigen_truncation_error(basis, test);
            evs = basis.eigenvalues;
        } else {
            // fractional order: beta-power of the order-2 base; reference
            // diagonal is the full-rank spectral reconstruction
            const double beta = m / 2.0;
            const EigenBasis basis = nystrom_decompose(KernelSpec::matern(2.0, g),
                                                       o.quad_m, o.quad_m,
                                                       /*clamp_rank=*/true);
            if (basis.N() < n)
                throw RankDeficientBasis("fractional basis rank below requested N");
            const MatrixXd e = nystrom_extend(basis, test);
            const VectorXd evb = basis.eigenvalues.array().pow(beta).matrix();
            const MatrixXd e2 = e.array().square().matrix();
            const VectorXd full = e2 * evb;
            const VectorXd trunc = e2.leftCols(n) * evb.head(n);
            err = (full - trunc).cwiseAbs().mean();
            evs = evb.head(n);
        }
        rows((Index)i, 0) = m;
        rows((Index)i, 1) = n;
        rows((Index)i, 2) = g;
        rows((Index)i, 3) = err;
        for (int j = 0; j < evs.size(); ++j) {
            VectorXd er(3);
            er << m, j + 1, evs[j];
            ev_rows.push_back(er);
        }
    }
    const auto comments = manifest_comments(manifest);
    write_csv(out_path(o.out, "eigen.csv", o.force), {"m", "N", "gamma", "error"}, rows,
              comments);
    MatrixXd em((Index)ev_rows.size(), 3);
    for (size_t i = 0; i < ev_rows.size(); ++i) em.row((Index)i) = ev_rows[i];
    write_csv(out_path(o.out, "eigenvalues.csv", o.force), {"m", "j", "eigenvalue"}, em,
              comments);
    return 0;
}

// -------------------------------------------------------------- scale-study

struct ScaleOpts {
    StudyOpts study;
    std::vector<double> gammas = {0.01, 0.1, 1.0, 10.0};
};

void bind_scale(CliConfig& cc, ScaleOpts& o) {
    bind_study(cc, o.study);
    cc.add(o.gammas, "gammas", "norm length scales to sweep");
}

int cmd_scale(const ScaleOpts& o, const json& snapshot, const std::string& config_path) {
    const json manifest =
        make_manifest("scale-study", config_path, snapshot, o.study.sc.seed, o.study.out);
    write_json_file(out_path(o.study.out, "manifest.json", o.study.force), manifest);

    StudyConfig c = o.study.sc;
    c.model = o.study.model;
    c.mode = CalibMode::Sobolev;
    c.bounds = bounds_from_flat(o.study.bounds, MatrixXd());
    c.sigma2 = o.study.sigma2s.empty() ? 0.1 : o.study.sigma2s[0];
    const auto rows = run_scale_study(c, o.gammas);

    MatrixXd m((Index)rows.size(), 6);
    for (size_t i = 0; i < rows.size(); ++i)
        m.row((Index)i) << rows[i].gamma, rows[i].theta_star, rows[i].mean_theta,
            rows[i].sd_theta, rows[i].rkhs_norm, rows[i].w1_norm;
    write_csv(out_path(o.study.out, "scale.csv", o.study.force),
              {"gamma", "theta_star", "mean_theta", "sd_theta", "rkhs_norm", "w1_norm"}, m,
              manifest_comments(manifest));
    return 0;
}

// --------------------------------------------------------------------- main

int error_exit(const std::exception& e) {
    int code = 2;
    const char* type = "Error";
    if (const auto* se = dynamic_cast<const SobocalError*>(&e)) {
        type = se->kind();
        if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e) ||
            dynamic_cast<const ShapeError*>(&e))
            code = 1;
    }
    json err;
    err["error"]["type"] = type;
    err["error"]["message"] = e.what();
    err["error"]["exit_code"] = code;
    std::cerr << err.dump() << "\n";
    return code;
}

int run(int argc, char** argv) {
    CLI::App app{"sobocal: Sobolev calibration of imperfect computer models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CalibrateOpts cal;
    CliConfig cal_cc;
    auto* cal_sub = app.add_subcommand(
        "calibrate", "fit the physical process from a dataset and calibrate a computer model");
    cal_cc.attach(cal_sub);
    bind_calibrate(cal_cc, cal);

    UqOpts uq;
    CliConfig uq_cc;
    auto* uq_sub = app.add_subcommand(
        "uq", "calibrate, then quantify uncertainty (intervals and bands)");
    uq_cc.attach(uq_sub);
    bind_uq(uq_cc, uq);

    StudyOpts study;
    CliConfig study_cc;
    auto* study_sub =
        app.add_subcommand("study", "seeded Monte Carlo calibration study");
    study_cc.attach(study_sub);
    bind_study(study_cc, study);

    EigenOpts eig;
    CliConfig eig_cc;
    auto* eig_sub = app.add_subcommand(
        "eigen", "kernel eigenvalue decomposition and truncation-error table");
    eig_cc.attach(eig_sub);
    bind_eigen(eig_cc, eig);

    ScaleOpts scale;
    CliConfig scale_cc;
    auto* scale_sub = app.add_subcommand(
        "scale-study", "norm length-scale sweep with discrepancy norms");
    scale_cc.attach(scale_sub);
    bind_scale(scale_cc, scale);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return error_exit(ConfigError(e.what()));
    }

    try {
        if (cal_sub->parsed())
            return cmd_calibrate(cal, cal_cc.finalize(), cal_cc.config_path());
        if (uq_sub->parsed()) return cmd_uq(uq, uq_cc.finalize(), uq_cc.config_path());
        if (study_sub->parsed())
            return cmd_study(study, study_cc.finalize(), study_cc.config_path());
        if (eig_sub->parsed()) return cmd_eigen(eig, eig_cc.finalize(), eig_cc.config_path());
        if (scale_sub->parsed())
            return cmd_scale(scale, scale_cc.finalize(), scale_cc.config_path());
    } catch (const std::exception& e) {
        return error_exit(e);
    }
    return 0;
}

}  // namespace
}  // namespace sobocal

int main(int argc, char** argv) { return sobocal::run(argc, argv); }
