#include "sobocal/regression.hpp"

namespace sobocal {

void Dataset::validate() const {
    if (n() < 2) throw ShapeError("dataset requires at least 2 rows");
    if (y.size() != x.rows()) throw ShapeError("dataset x/y length mismatch");
    if (!x.allFinite() || !y.allFinite())
        throw ShapeError("dataset contains non-finite values");
    if (noise_variance && *noise_variance < 0.0)
        throw ShapeError("noise variance must be nonnegative");
}

Dataset Dataset::from_columns(const VectorXd& x1, const VectorXd& y) {
    Dataset d;
    d.x.resize(x1.size(), 1);
    d.x.col(0) = x1;
    d.y = y;
    return d;
}

double SurfaceModel::predict(double x) const {
    Eigen::RowVectorXd r(1);
    r[0] = x;
    return predict_row(r);
}

double SurfaceModel::predict_row(const Eigen::RowVectorXd& x) const {
    double acc = 0.0;
    for (int j = 0; j < train_x.rows(); ++j) {
        const double r = kernel.gamma * (x - train_x.row(j)).norm();
        acc += matern_scalar(r, kernel.nu()) * coefficients[j];
    }
    return acc;
}

VectorXd SurfaceModel::predict(const VectorXd& xs) const {
    MatrixXd q(xs.size(), 1);
    q.col(0) = xs;
    return kernel_cross(q, train_x, kernel) * coefficients;
}

double SurfaceModel::posterior_variance(double x) const {
    VectorXd xs(1);
    xs[0] = x;
    return posterior_variance(xs)[0];
}

VectorXd SurfaceModel::posterior_variance(const VectorXd& xs) const {
    if (kind != SurfaceKind::GPPosterior)
        throw SobocalError("posterior_variance is defined for GP posteriors");
    MatrixXd q(xs.size(), 1);
    q.col(0) = xs;
    const MatrixXd r1 = kernel_cross(q, train_x, kernel);  // P x n
    const MatrixXd sol = factor.solve(MatrixXd(r1.transpose()));
    VectorXd out(xs.size());
    for (int i = 0; i < xs.size(); ++i) {
        double v = 1.0 - r1.row(i).dot(sol.col(i));
        if (v < 0.0) {
            if (v < -1e-10)
                throw SobocalError("posterior variance below tolerance");
            v = 0.0;
        }
        out[i] = variance_scale * v;
    }
    return out;
}

SurfaceModel fit_krr(const Dataset& data, const KernelSpec& kernel, double lambda) {
    data.validate();
    if (lambda <= 0.0) throw SobocalError("fit_krr: lambda must be positive");
    const int n = data.n();
    MatrixXd R = kernel_matrix(data.x, kernel).values;
    MatrixXd A = R;
    A.diagonal().array() += n * lambda;
    SurfaceModel m;
    m.kind = SurfaceKind::KRR;
    m.kernel = kernel;
    m.train_x = data.x;
    m.regularizer = lambda;
    m.factor = chol_jitter(A, 0.0);
    m.coefficients = m.factor.solve(data.y);
    m.rkhs_norm = std::sqrt(std::max(0.0, m.coefficients.dot(R * m.coefficients)));
    return m;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> g(30);
    for (int i = 0; i < 30; ++i) g[i] = std::pow(10.0, -8.0 + 8.0 * i / 29.0);
    return g;
}

double gcv_select_lambda(const Dataset& data, const KernelSpec& kernel,
                         const std::vector<double>& lambda_grid) {
    data.validate();
    if (lambda_grid.empty()) throw SelectionFailed("empty lambda grid");
    const int n = data.n();
    const MatrixXd R = kernel_matrix(data.x, kernel).values;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(R);
    if (es.info() != Eigen::Success)
        throw SobocalError("gcv_select_lambda: eigendecomposition failed");
    const VectorXd w = es.eigenvalues();
    const VectorXd z = es.eigenvectors().transpose() * data.y;
    double best = std::numeric_limits<double>::quiet_NaN();
    double bestg = std::numeric_limits<double>::infinity();
    for (double lam : lambda_grid) {
        // I - A has eigenvalues n*lam / (w + n*lam)
        const VectorXd dd = (n * lam) / (w.array() + n * lam);
        const double num = (dd.array() * z.array()).square().mean();
        const double den = dd.mean() * dd.mean();
        const double g = num / den;
        if (std::isfinite(g) && g <= bestg) {
            bestg = g;
            best = lam;
        }
    }
    if (!std::isfinite(best)) throw SelectionFailed("all GCV values non-finite");
    return best;
}

SurfaceModel gp_posterior(const Dataset& data, const KernelSpec& kernel, double mu,
                          double variance_scale) {
    data.validate();
    if (mu <= 0.0) throw SobocalError("gp_posterior: mu must be positive");
    MatrixXd A = kernel_matrix(data.x, kernel).values;
    A.diagonal().array() += mu;
    SurfaceModel m;
    m.kind = SurfaceKind::GPPosterior;
    m.kernel = kernel;
    m.train_x = data.x;
    m.regularizer = mu;
    m.variance_scale = variance_scale;
    m.factor = chol_jitter(A, 0.0);
    m.coefficients = m.factor.solve(data.y);
    const MatrixXd R = kernel_matrix(data.x, kernel).values;
    m.rkhs_norm = std::sqrt(std::max(0.0, m.coefficients.dot(R * m.coefficients)));
    return m;
}

std::vector<double> default_mu_grid() {
    std::vector<double> g(30);
    for (int i = 0; i < 30; ++i) g[i] = std::pow(10.0, -3.0 + 4.0 * i / 29.0);
    return g;
}

double select_mu_validation(const Dataset& data, const KernelSpec& kernel,
                            const std::vector<double>& mu_grid,
                            double holdout_fraction, uint64_t split_seed) {
    data.validate();
    if (mu_grid.empty()) throw SelectionFailed("empty mu grid");
    if (!(holdout_fraction > 0.0 && holdout_fraction <= 0.5))
        throw SobocalError("holdout_fraction must lie in (0, 0.5]");
    const int n = data.n();
    const int nh = std::max(1, static_cast<int>(std::lround(holdout_fraction * n)));
    const int nt = n - nh;
    if (nt < 2) throw ShapeError("select_mu_validation: training split too small");

    Rng rng(derive_seed(split_seed, 0x9151ULL));
    std::vector<int> perm = rng.permutation(n);
    MatrixXd xt(nt, data.d()), xh(nh, data.d());
    VectorXd yt(nt), yh(nh);
    for (int i = 0; i < nt; ++i) {
        xt.row(i) = data.x.row(perm[i]);
        yt[i] = data.y[perm[i]];
    }
    for (int i = 0; i < nh; ++i) {
        xh.row(i) = data.x.row(perm[nt + i]);
        yh[i] = data.y[perm[nt + i]];
    }

    const MatrixXd Rt = kernel_matrix(xt, kernel).values;
    const MatrixXd Kht = kernel_cross(xh, xt, kernel);
    double best = mu_grid.front();
    double bestmse = std::numeric_limits<double>::infinity();
    for (double mu : mu_grid) {
        MatrixXd A = Rt;
        A.diagonal().array() += mu;
        CholFactor f = chol_jitter(A, 0.0);
        const VectorXd alpha = f.solve(yt);
        const double mse = (yh - Kht * alpha).squaredNorm() / nh;
        if (mse < bestmse) {
            bestmse = mse;
            best = mu;
        }
    }
    return best;
}

VectorXd sample_gp_path(const KernelSpec& kernel,
                        const std::function<double(double)>& mean_fn,
                        const VectorXd& grid, double variance, uint64_t seed) {
    const int m = static_cast<int>(grid.size());
    VectorXd path(m);
    for (int i = 0; i < m; ++i) path[i] = mean_fn(grid[i]);
    if (variance == 0.0) return path;
    MatrixXd K = variance * kernel_matrix(grid, kernel).values;
    CholFactor f = chol_jitter(K);
    Rng rng(seed);
    path += f.L * rng.normal_vec(m);
    return path;
}

double interp_linear(const VectorXd& grid, const VectorXd& values, double x) {
    const int m = static_cast<int>(grid.size());
    if (x <= grid[0]) return values[0];
    if (x >= grid[m - 1]) return values[m - 1];
    int lo = 0, hi = m - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (grid[mid] <= x)
            lo = mid;
        else
            hi = mid;
    }
    const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
    return values[lo] * (1.0 - t) + values[hi] * t;
}

double estimate_sigma2(const Dataset& data, const KernelSpec& kernel, double lambda) {
    data.validate();
    const int n = data.n();
    const MatrixXd R = kernel_matrix(data.x, kernel).values;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(R);
    const VectorXd w = es.eigenvalues();
    const VectorXd z = es.eigenvectors().transpose() * data.y;
    const VectorXd dd = (n * lambda) / (w.array() + n * lambda);
    const double rss = (dd.array() * z.array()).square().sum();
    const double tr = dd.sum();
    if (tr <= 0.0) throw SingularInformation("estimate_sigma2: zero residual freedom");
    return rss / tr;
}

}  // namespace sobocal
