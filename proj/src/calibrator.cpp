#include "sobocal/calibrator.hpp"

#include <sstream>

namespace sobocal {

std::string calib_mode_name(CalibMode mode) {
    switch (mode) {
        case CalibMode::Sobolev: return "sobolev";
        case CalibMode::L2: return "l2";
        case CalibMode::KO: return "ko";
    }
    return "?";
}

CalibMode calib_mode_from_name(const std::string& name) {
    if (name == "sobolev" || name == "S" || name == "s") return CalibMode::Sobolev;
    if (name == "l2" || name == "L2") return CalibMode::L2;
    if (name == "ko" || name == "KO") return CalibMode::KO;
    throw ConfigError("unknown calibration mode: " + name);
}

void CalibrationProblem::validate() const {
    if (!f_phat || !f_s) throw SobocalError("calibration problem missing functions");
    if (bounds.cols() != 2 || bounds.rows() < 1)
        throw SobocalError("bounds must be q x 2");
    for (int i = 0; i < bounds.rows(); ++i)
        if (!(bounds(i, 0) < bounds(i, 1)))
            throw SobocalError("each bound must satisfy lower < upper");
    if (spaces.empty()) throw SobocalError("calibration problem has no norm spaces");
}

PreparedObjective::PreparedObjective(const CalibrationProblem& problem)
    : problem_(&problem) {
    problem.validate();
    fphat_values_.reserve(problem.spaces.size());
    for (const NormSpace& sp : problem.spaces) {
        const VectorXd& dz = sp.design_points();
        VectorXd v(dz.size());
        for (int i = 0; i < dz.size(); ++i) v[i] = problem.f_phat(dz[i]);
        fphat_values_.push_back(std::move(v));
    }
}

double PreparedObjective::operator()(const VectorXd& theta) const {
    const CalibrationProblem& p = *problem_;
    double acc = 0.0;
    for (size_t k = 0; k < p.spaces.size(); ++k) {
        const VectorXd& dz = p.spaces[k].design_points();
        VectorXd g(dz.size());
        for (int i = 0; i < dz.size(); ++i) {
            const double fs = p.f_s(dz[i], theta);
            if (!std::isfinite(fs)) {
                std::ostringstream os;
                os << "computer model returned non-finite value at x=" << dz[i]
                   << ", theta=[" << theta.transpose() << "]";
                throw ModelEvaluationError(os.str());
            }
            g[i] = fphat_values_[k][i] - fs;
        }
        acc += p.spaces[k].norm_sq(g);
    }
    return acc / p.spaces.size();
}

double PreparedObjective::operator()(double theta) const {
    VectorXd t(1);
    t[0] = theta;
    return (*this)(t);
}

double calib_objective(const VectorXd& theta, const CalibrationProblem& problem) {
    return PreparedObjective(problem)(theta);
}

MatrixXd latin_hypercube(const MatrixXd& bounds, int k, uint64_t seed) {
    const int q = static_cast<int>(bounds.rows());
    MatrixXd pts(k, q);
    Rng rng(derive_seed(seed, 0x1a7c8ULL));
    for (int j = 0; j < q; ++j) {
        std::vector<int> perm = rng.permutation(k);
        for (int i = 0; i < k; ++i) {
            const double u = (perm[i] + rng.uniform()) / k;
            pts(i, j) = bounds(j, 0) + u * (bounds(j, 1) - bounds(j, 0));
        }
    }
    return pts;
}

NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f,
                             const VectorXd& start, const MatrixXd& bounds,
                             double simplex_tol, int max_iterations) {
    const int q = static_cast<int>(start.size());
    auto clamp = [&](VectorXd v) {
        for (int j = 0; j < q; ++j)
            v[j] = std::min(std::max(v[j], bounds(j, 0)), bounds(j, 1));
        return v;
    };
    NelderMeadResult res;
    auto eval = [&](const VectorXd& v) {
        ++res.evaluations;
        return f(clamp(v));
    };

    std::vector<VectorXd> simplex(q + 1, start);
    for (int j = 0; j < q; ++j) {
        const double step = 0.05 * (bounds(j, 1) - bounds(j, 0));
        simplex[j + 1][j] += step;
        simplex[j + 1] = clamp(simplex[j + 1]);
    }
    std::vector<double> fv(q + 1);
    for (int i = 0; i <= q; ++i) fv[i] = eval(simplex[i]);

    for (int iter = 0; iter < max_iterations; ++iter) {
        std::vector<int> order(q + 1);
        for (int i = 0; i <= q; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fv[a] < fv[b]; });
        std::vector<VectorXd> s2(q + 1);
        std::vector<double> f2(q + 1);
        for (int i = 0; i <= q; ++i) {
            s2[i] = simplex[order[i]];
            f2[i] = fv[order[i]];
        }
        simplex = s2;
        fv = f2;

        double diam = 0.0;
        for (int i = 1; i <= q; ++i)
            diam = std::max(diam, (simplex[i] - simplex[0]).norm());
        if (diam < simplex_tol) {
            res.converged = true;
            break;
        }

        VectorXd centroid = VectorXd::Zero(q);
        for (int i = 0; i < q; ++i) centroid += simplex[i];
        centroid /= q;

        const VectorXd reflect = centroid + (centroid - simplex[q]);
        const double fr = eval(reflect);
        if (fr < fv[0]) {
            const VectorXd expand = centroid + 2.0 * (centroid - simplex[q]);
            const double fe = eval(expand);
            if (fe < fr) {
                simplex[q] = clamp(expand);
                fv[q] = fe;
            } else {
                simplex[q] = clamp(reflect);
                fv[q] = fr;
            }
        } else if (fr < fv[q - 1]) {
            simplex[q] = clamp(reflect);
            fv[q] = fr;
        } else {
            const VectorXd contract = centroid + 0.5 * (simplex[q] - centroid);
            const double fc = eval(contract);
            if (fc < fv[q]) {
                simplex[q] = clamp(contract);
                fv[q] = fc;
            } else {
                for (int i = 1; i <= q; ++i) {
                    simplex[i] = clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]));
                    fv[i] = eval(simplex[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= q; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = clamp(simplex[best]);
    res.value = fv[best];
    return res;
}

namespace {

CalibrationResult optimize_1d(const PreparedObjective& obj,
                              const CalibrationProblem& p,
                              const OptimizerConfig& cfg, int ngrid) {
    CalibrationResult res;
    res.mode = p.mode;
    auto f = [&](double t) { return obj(t); };
    Minimize1dResult m =
        minimize_grid_golden(f, p.bounds(0, 0), p.bounds(0, 1), ngrid, cfg.golden_tol);
    res.theta.resize(1);
    res.theta[0] = m.x;
    res.objective = m.value;
    res.evaluations = m.evals;
    res.converged = true;
    return res;
}

CalibrationResult optimize_nd(const PreparedObjective& obj,
                              const CalibrationProblem& p,
                              const OptimizerConfig& cfg) {
    auto f = [&](const VectorXd& t) { return obj(t); };
    const MatrixXd starts = latin_hypercube(p.bounds, cfg.multistarts, cfg.seed);
    CalibrationResult res;
    res.mode = p.mode;
    res.objective = std::numeric_limits<double>::infinity();
    int failures = 0;
    for (int s = 0; s < starts.rows(); ++s) {
        ++res.restarts;
        try {
            NelderMeadResult nm = nelder_mead(f, starts.row(s).transpose(), p.bounds,
                                              cfg.simplex_tol, cfg.max_iterations);
            res.evaluations += nm.evaluations;
            // coordinate golden-section polish
            VectorXd x = nm.x;
            double val = nm.value;
            for (int j = 0; j < p.q(); ++j) {
                VectorXd probe = x;
                auto f1 = [&](double t) {
                    probe[j] = t;
                    return f(probe);
                };
                const double span = 0.05 * (p.bounds(j, 1) - p.bounds(j, 0));
                const double lo = std::max(p.bounds(j, 0), x[j] - span);
                const double hi = std::min(p.bounds(j, 1), x[j] + span);
                const double t = golden_section(f1, lo, hi, cfg.golden_tol);
                probe[j] = t;
                const double v = f(probe);
                if (v < val) {
                    x[j] = t;
                    val = v;
                }
                probe = x;
            }
            if (val < res.objective) {
                res.objective = val;
                res.theta = x;
                res.converged = nm.converged;
            }
        } catch (const SobocalError&) {
            ++failures;
        }
    }
    if (failures == starts.rows())
        throw OptimizationFailed("all optimizer starts failed");
    // coarse-grid probes so the reported minimum is never beaten by the scan
    const MatrixXd probes = latin_hypercube(p.bounds, 64, cfg.seed + 1);
    for (int i = 0; i < probes.rows(); ++i) {
        const VectorXd t = probes.row(i).transpose();
        const double v = f(t);
        ++res.evaluations;
        if (v < res.objective) {
            NelderMeadResult nm =
                nelder_mead(f, t, p.bounds, cfg.simplex_tol, cfg.max_iterations);
            res.evaluations += nm.evaluations;
            if (nm.value < res.objective) {
                res.objective = nm.value;
                res.theta = nm.x;
            }
        }
    }
    return res;
}

}  // namespace

CalibrationResult calibrate(const CalibrationProblem& problem,
                            const OptimizerConfig& config) {
    PreparedObjective obj(problem);
    if (problem.q() == 1)
        return optimize_1d(obj, problem, config, config.grid_points);
    return optimize_nd(obj, problem, config);
}

VectorXd true_parameter(const CalibrationProblem& problem,
                        const OptimizerConfig& config) {
    PreparedObjective obj(problem);
    if (problem.q() == 1)
        return optimize_1d(obj, problem, config, 2001).theta;
    return optimize_nd(obj, problem, config).theta;
}

}  // namespace sobocal
