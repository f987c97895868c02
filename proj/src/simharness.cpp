#include "sobocal/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace sobocal {

double default_lambda_scale(CalibMode mode) {
    // undersmoothing factor for the plug-in estimate; the norm objectives
    // are sensitive to oversmoothing, the L2/KO ones are not
    return mode == CalibMode::Sobolev ? 0.3 : 1.0;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SOBOCAL_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

namespace {

struct ResolvedStudy {
    ExperimentModel model;
    MatrixXd bounds;
    double lambda_scale = 1.0;
    int ko_design = 12;
    KernelSpec fit_kernel;    // regression kernel for f_phat
    KernelSpec space_kernel;  // Sobolev norm kernel (unset if m = 0)
    KernelSpec ko_kernel;
};

ResolvedStudy resolve(const StudyConfig& c) {
    if (c.trials < 1) throw ConfigError("trial count must be >= 1");
    ResolvedStudy r;
    r.model = get_model(c.model, c.example1_reading);
    r.bounds = c.bounds.size() ? c.bounds : r.model.bounds;
    r.lambda_scale = c.lambda_scale >= 0.0 ? c.lambda_scale : default_lambda_scale(c.mode);
    r.ko_design = c.ko_design_size > 0 ? c.ko_design_size : (c.model == "example1" ? 30 : 12);
    r.fit_kernel = KernelSpec::matern_nu(1.5, 1.0);
    if (c.mode == CalibMode::Sobolev && c.sobolev_m > 0.0)
        r.space_kernel = KernelSpec::matern(c.sobolev_m, c.design_gamma);
    if (c.mode == CalibMode::KO) r.ko_kernel = KernelSpec::matern(c.ko_m, c.ko_gamma);
    return r;
}

std::vector<NormSpace> make_spaces(Rng& rng, const StudyConfig& c, const ResolvedStudy& r) {
    std::vector<NormSpace> out;
    const bool ko = c.mode == CalibMode::KO;
    const int size = ko ? r.ko_design : c.norm_design_size;
    for (int k = 0; k < c.norm_design_count; ++k) {
        VectorXd dz = rng.uniform_vec(size);
        std::sort(dz.begin(), dz.end());
        if (ko)
            out.push_back(NormSpace::rkhs(r.ko_kernel, dz));
        else if (c.mode == CalibMode::L2 || c.sobolev_m == 0.0)
            out.push_back(NormSpace::l2(dz));
        else
            out.push_back(NormSpace::rkhs(r.space_kernel, dz));
    }
    return out;
}

CalibrationProblem make_problem(const StudyConfig& c, const ResolvedStudy& r,
                                const SurfaceModel& fp, std::vector<NormSpace> spaces) {
    CalibrationProblem prob;
    prob.f_phat = [&fp](double x) { return fp.predict(x); };
    prob.f_s = r.model.f_s;
    prob.bounds = r.bounds;
    prob.spaces = std::move(spaces);
    prob.mode = c.mode;
    prob.m = c.sobolev_m;
    return prob;
}

TrialRecord run_trial_deterministic(int t, const StudyConfig& c, const ResolvedStudy& r) {
    TrialRecord rec;
    rec.trial = t;
    Rng rng(derive_seed(c.seed, (uint64_t)t));

    const VectorXd x = rng.uniform_vec(c.n);
    VectorXd y(c.n);
    for (int i = 0; i < c.n; ++i) y[i] = r.model.f_p(x[i]);
    y += std::sqrt(c.sigma2) * rng.normal_vec(c.n);
    const Dataset data = Dataset::from_columns(x, y);

    rec.lambda = c.lambda_fixed > 0.0
                     ? c.lambda_fixed
                     : gcv_select_lambda(data, r.fit_kernel, default_lambda_grid()) *
                           r.lambda_scale;
    const SurfaceModel fp = fit_krr(data, r.fit_kernel, rec.lambda);

    CalibrationProblem prob = make_problem(c, r, fp, make_spaces(rng, c, r));
    OptimizerConfig oc;
    oc.grid_points = c.grid_points;
    const CalibrationResult res = calibrate(prob, oc);
    rec.theta = res.theta[0];
    rec.objective = res.objective;
    rec.ok = true;
    return rec;
}

struct GpTruthShared {
    VectorXd pgrid;
    VectorXd pmean;
    CholFactor pfac;  // of gp_variance * K(pgrid, pgrid)
    VectorXd ref_design;
    NormSpace ref_space;
    std::vector<double> mu_grid;
};

GpTruthShared make_gp_shared(const StudyConfig& c, const ResolvedStudy& r) {
    const KernelSpec ref_kernel =
        KernelSpec::matern(c.sobolev_m > 0.0 ? c.sobolev_m : 1.0, c.design_gamma);
    const VectorXd ref_design = linspace(0.0005, 0.9995, c.ref_grid);
    GpTruthShared s{.pgrid = midpoint_grid(c.path_grid),
                    .pmean = VectorXd(c.path_grid),
                    .pfac = {},
                    .ref_design = ref_design,
                    .ref_space = NormSpace::rkhs(ref_kernel, ref_design),
                    .mu_grid = default_mu_grid()};
    for (int i = 0; i < c.path_grid; ++i) s.pmean[i] = r.model.f_p(s.pgrid[i]);
    s.pfac = chol_jitter(r.model.gp_variance *
                         kernel_matrix(s.pgrid, r.model.gp_kernel).values);
    return s;
}

TrialRecord run_trial_gp(int t, const StudyConfig& c, const ResolvedStudy& r,
                         const GpTruthShared& sh) {
    TrialRecord rec;
    rec.trial = t;
    Rng rng(derive_seed(c.seed, (uint64_t)t));
    const double noise_sd = std::sqrt(c.sigma2);

    const VectorXd path = sh.pmean + sh.pfac.L * rng.normal_vec(c.path_grid);
    const auto fpath = [&](double xx) { return interp_linear(sh.pgrid, path, xx); };

    // regularizer selection on its own sample, sequential train/holdout split
    const int ns = c.mu_select_size;
    const int ntr = (int)std::lround(ns * (1.0 - c.mu_holdout));
    if (ntr < 2 || ntr >= ns) throw ConfigError("mu_holdout leaves an empty split");
    const VectorXd xv = rng.uniform_vec(ns);
    VectorXd yv(ns);
    for (int i = 0; i < ns; ++i) yv[i] = fpath(xv[i]);
    yv += noise_sd * rng.normal_vec(ns);
    const VectorXd xt = xv.head(ntr), yt = yv.head(ntr);
    const VectorXd xh = xv.tail(ns - ntr), yh = yv.tail(ns - ntr);
    const MatrixXd rt = kernel_matrix(xt, r.fit_kernel).values;
    const MatrixXd kht = kernel_cross(xh, xt, r.fit_kernel);
    double best = std::numeric_limits<double>::infinity();
    for (double mu : sh.mu_grid) {
        const CholFactor f =
            chol_jitter(rt + mu * MatrixXd::Identity(ntr, ntr), 0.0);
        const double mse = (yh - kht * f.solve(yt)).squaredNorm() / (ns - ntr);
        if (mse < best) {
            best = mse;
            rec.mu = mu;
        }
    }
    if (!std::isfinite(best)) throw SelectionFailed("no usable regularizer on the grid");

    const VectorXd x = rng.uniform_vec(c.n);
    VectorXd y(c.n);
    for (int i = 0; i < c.n; ++i) y[i] = fpath(x[i]);
    y += noise_sd * rng.normal_vec(c.n);
    const Dataset data = Dataset::from_columns(x, y);
    const SurfaceModel fp = gp_posterior(data, r.fit_kernel, rec.mu);

    // target for this realized path: dense-design Sobolev minimizer
    VectorXd fref(sh.ref_design.size());
    for (Index i = 0; i < sh.ref_design.size(); ++i) fref[i] = fpath(sh.ref_design[i]);
    VectorXd th1(1);
    const auto obj_star = [&](double th) {
        th1[0] = th;
        VectorXd g = fref;
        for (Index i = 0; i < sh.ref_design.size(); ++i)
            g[i] -= r.model.f_s(sh.ref_design[i], th1);
        return sh.ref_space.norm_sq(g);
    };
    rec.theta_star =
        minimize_grid_golden(obj_star, r.bounds(0, 0), r.bounds(0, 1), c.grid_points).x;

    CalibrationProblem prob = make_problem(c, r, fp, make_spaces(rng, c, r));
    OptimizerConfig oc;
    oc.grid_points = c.grid_points;
    const CalibrationResult res = calibrate(prob, oc);
    rec.theta = res.theta[0];
    rec.objective = res.objective;
    rec.sq_error = (rec.theta - rec.theta_star) * (rec.theta - rec.theta_star);
    rec.ok = true;
    return rec;
}

template <typename Fn>
void parallel_trials(int trials, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (int t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, trials);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            int t;
            while ((t = next.fetch_add(1)) < trials) fn(t);
        });
    for (auto& th : pool) th.join();
}

template <typename TrialFn>
std::vector<TrialRecord> collect_trials(const StudyConfig& c, TrialFn&& fn) {
    std::vector<TrialRecord> recs(c.trials);
    parallel_trials(c.trials, resolve_threads(c.threads), [&](int t) {
        try {
            recs[t] = fn(t);
        } catch (const std::exception& e) {
            recs[t] = TrialRecord{};
            recs[t].trial = t;
            recs[t].error = e.what();
        }
    });
    return recs;
}

void check_failures(const std::vector<TrialRecord>& recs, int trials) {
    int failures = 0;
    std::string first;
    for (const auto& r : recs)
        if (!r.ok) {
            ++failures;
            if (first.empty()) first = "trial " + std::to_string(r.trial) + ": " + r.error;
        }
    if (failures * 10 > trials)
        throw StudyFailed(std::to_string(failures) + "/" + std::to_string(trials) +
                          " trials failed; first: " + first);
}

}  // namespace

StudySummary run_study(const StudyConfig& config) {
    const ResolvedStudy r = resolve(config);
    StudySummary sum;
    sum.config = config;

    if (r.model.gp_truth) {
        const GpTruthShared sh = make_gp_shared(config, r);
        sum.trials = collect_trials(
            config, [&](int t) { return run_trial_gp(t, config, r, sh); });
    } else {
        sum.trials = collect_trials(
            config, [&](int t) { return run_trial_deterministic(t, config, r); });
    }
    check_failures(sum.trials, config.trials);

    std::vector<double> thetas, mus, d2;
    for (const auto& rec : sum.trials) {
        if (!rec.ok) {
            ++sum.failures;
            continue;
        }
        thetas.push_back(rec.theta);
        if (r.model.gp_truth) {
            mus.push_back(rec.mu);
            d2.push_back(rec.sq_error);
        }
    }
    sum.completed = (int)thetas.size();
    Eigen::Map<const VectorXd> tv(thetas.data(), (Index)thetas.size());
    sum.mean_theta = mean(tv);
    sum.sd_degenerate = sum.completed < 2;
    sum.sd_theta = sum.sd_degenerate ? 0.0 : sample_sd(tv);
    sum.median_theta = median(thetas);
    if (!d2.empty()) {
        Eigen::Map<const VectorXd> dv(d2.data(), (Index)d2.size());
        sum.mse = mean(dv);
        sum.median_mu = median(mus);
    }
    return sum;
}

CoverageSummary run_coverage(const StudyConfig& config) {
    const ResolvedStudy r = resolve(config);
    if (r.model.gp_truth || config.mode != CalibMode::Sobolev)
        throw ConfigError("coverage study requires a deterministic model in sobolev mode");
    CoverageSummary sum;
    sum.config = config;

    // fixed target: dense-design minimizer under the exact truth
    const VectorXd ref_design = linspace(0.0005, 0.9995, config.ref_grid);
    const NormSpace ref_space = NormSpace::rkhs(
        KernelSpec::matern(config.sobolev_m, config.design_gamma), ref_design);
    VectorXd fref(ref_design.size());
    for (Index i = 0; i < ref_design.size(); ++i) fref[i] = r.model.f_p(ref_design[i]);
    VectorXd th1(1);
    const auto obj_star = [&](double th) {
        th1[0] = th;
        VectorXd g = fref;
        for (Index i = 0; i < ref_design.size(); ++i)
            g[i] -= r.model.f_s(ref_design[i], th1);
        return ref_space.norm_sq(g);
    };
    sum.theta_star =
        minimize_grid_golden(obj_star, r.bounds(0, 0), r.bounds(0, 1), config.grid_points).x;

    const auto basis = cached_basis(
        KernelSpec::matern(config.sobolev_m > 0.0 ? config.sobolev_m : 1.0,
                           config.design_gamma),
        config.uq.basis_m, config.uq.basis_n);
    const double z = normal_quantile((1.0 + config.uq.level) / 2.0);
    const VectorXd band_x = linspace(0.0, 1.0, config.uq.band_grid);
    MatrixXd band_ref(1, band_x.size());
    {
        VectorXd ts(1);
        ts[0] = sum.theta_star;
        for (Index j = 0; j < band_x.size(); ++j) band_ref(0, j) = r.model.f_s(band_x[j], ts);
    }

    sum.trials = collect_trials(config, [&](int t) {
        TrialRecord rec = run_trial_deterministic(t, config, r);

        // rebuild the fitted objective for the curvature step
        Rng rng(derive_seed(config.seed, (uint64_t)t));
        const VectorXd x = rng.uniform_vec(config.n);
        VectorXd y(config.n);
        for (int i = 0; i < config.n; ++i) y[i] = r.model.f_p(x[i]);
        y += std::sqrt(config.sigma2) * rng.normal_vec(config.n);
        const Dataset data = Dataset::from_columns(x, y);
        const SurfaceModel fp = fit_krr(data, r.fit_kernel, rec.lambda);
        CalibrationProblem prob = make_problem(config, r, fp, make_spaces(rng, config, r));
        const PreparedObjective prep(prob);

        VectorXd tv(1);
        tv[0] = rec.theta;
        const MatrixXd vmat = curvature_matrix([&](const VectorXd& th) { return prep(th); },
                                               tv, config.uq.hessian_step);
        const MatrixXd wmat = information_matrix(r.model.f_s, r.model.grad_fs, tv, *basis,
                                                 config.uq.fd_theta_step);
        const MatrixXd cov = theta_covariance(vmat, wmat, config.sigma2, config.n);
        rec.se = std::sqrt(std::max(cov(0, 0), 0.0));
        rec.ci_lo = rec.theta - z * rec.se;
        rec.ci_hi = rec.theta + z * rec.se;
        rec.ci_covered = rec.ci_lo <= sum.theta_star && sum.theta_star <= rec.ci_hi;
        rec.theta_star = sum.theta_star;
        rec.sq_error = (rec.theta - sum.theta_star) * (rec.theta - sum.theta_star);

        const VectorXd draws = stratified_normal_draws(rec.theta, rec.se, config.uq.draws);
        MatrixXd fs_vals(config.uq.draws, band_x.size());
        VectorXd td(1);
        for (int d = 0; d < config.uq.draws; ++d) {
            td[0] = draws[d];
            for (Index j = 0; j < band_x.size(); ++j) fs_vals(d, j) = r.model.f_s(band_x[j], td);
        }
        const VectorXd lo = pointwise_quantile(fs_vals, (1.0 - config.uq.level) / 2.0);
        const VectorXd hi = pointwise_quantile(fs_vals, (1.0 + config.uq.level) / 2.0);
        int inside = 0;
        for (Index j = 0; j < band_x.size(); ++j)
            if (lo[j] <= band_ref(0, j) && band_ref(0, j) <= hi[j]) ++inside;
        rec.band_coverage = (double)inside / band_x.size();
        return rec;
    });
    check_failures(sum.trials, config.trials);

    std::vector<double> lens, scores;
    int covered = 0;
    double band_acc = 0.0;
    for (const auto& rec : sum.trials) {
        if (!rec.ok) {
            ++sum.failures;
            continue;
        }
        ++sum.completed;
        covered += rec.ci_covered ? 1 : 0;
        band_acc += rec.band_coverage;
        lens.push_back(rec.ci_hi - rec.ci_lo);
        scores.push_back(interval_score(rec.ci_lo, rec.ci_hi, sum.theta_star, config.uq.level));
    }
    if (sum.completed > 0) {
        sum.ci_coverage = (double)covered / sum.completed;
        sum.band_coverage = band_acc / sum.completed;
        sum.median_ci_length = median(lens);
        Eigen::Map<const VectorXd> sv(scores.data(), (Index)scores.size());
        sum.mean_interval_score = mean(sv);
    }
    return sum;
}

std::vector<ScaleRow> run_scale_study(const StudyConfig& config,
                                      const std::vector<double>& gammas) {
    std::vector<ScaleRow> rows;
    const VectorXd w1_grid = linspace(0.0, 1.0, 500);
    for (double g : gammas) {
        StudyConfig c = config;
        c.mode = CalibMode::Sobolev;
        c.design_gamma = g;
        const ResolvedStudy r = resolve(c);

        ScaleRow row;
        row.gamma = g;

        const VectorXd ref_design = linspace(0.0005, 0.9995, c.ref_grid);
        const NormSpace ref_space =
            NormSpace::rkhs(KernelSpec::matern(c.sobolev_m, g), ref_design);
        VectorXd fref(ref_design.size());
        for (Index i = 0; i < ref_design.size(); ++i) fref[i] = r.model.f_p(ref_design[i]);
        VectorXd th1(1);
        const auto ref_obj = [&](double th) {
            th1[0] = th;
            VectorXd gv = fref;
            for (Index i = 0; i < ref_design.size(); ++i)
                gv[i] -= r.model.f_s(ref_design[i], th1);
            return ref_space.norm_sq(gv);
        };
        row.theta_star =
            minimize_grid_golden(ref_obj, r.bounds(0, 0), r.bounds(0, 1), c.grid_points).x;

        const StudySummary sum = run_study(c);
        row.mean_theta = sum.mean_theta;
        row.sd_theta = sum.sd_theta;

        th1[0] = row.mean_theta;
        VectorXd delta_ref = fref;
        for (Index i = 0; i < ref_design.size(); ++i)
            delta_ref[i] -= r.model.f_s(ref_design[i], th1);
        row.rkhs_norm = std::sqrt(ref_space.norm_sq(delta_ref));

        VectorXd delta_w1(w1_grid.size());
        for (Index i = 0; i < w1_grid.size(); ++i)
            delta_w1[i] = r.model.f_p(w1_grid[i]) - r.model.f_s(w1_grid[i], th1);
        row.w1_norm = std::sqrt(sobolev_integer_norm_sq(delta_w1, 1, w1_grid));

        rows.push_back(row);
    }
    return rows;
}

}  // namespace sobocal
