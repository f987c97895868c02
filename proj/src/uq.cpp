#include "sobocal/uq.hpp"

#include <cmath>

namespace sobocal {

MatrixXd curvature_matrix(const std::function<double(const VectorXd&)>& f, const VectorXd& theta,
                          double step) {
    const Index q = theta.size();
    VectorXd h(q);
    for (Index k = 0; k < q; ++k) h[k] = step * (1.0 + std::abs(theta[k]));
    const double f0 = f(theta);
    MatrixXd v(q, q);
    for (Index k = 0; k < q; ++k) {
        VectorXd tp = theta, tm = theta;
        tp[k] += h[k];
        tm[k] -= h[k];
        v(k, k) = (f(tp) - 2.0 * f0 + f(tm)) / (h[k] * h[k]);
    }
    for (Index j = 0; j < q; ++j)
        for (Index k = j + 1; k < q; ++k) {
            VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
            tpp[j] += h[j];
            tpp[k] += h[k];
            tpm[j] += h[j];
            tpm[k] -= h[k];
            tmp[j] -= h[j];
            tmp[k] += h[k];
            tmm[j] -= h[j];
            tmm[k] -= h[k];
            v(j, k) = v(k, j) = (f(tpp) - f(tpm) - f(tmp) + f(tmm)) / (4.0 * h[j] * h[k]);
        }
    return v;
}

MatrixXd information_matrix(const std::function<double(double, const VectorXd&)>& f_s,
                            const std::function<VectorXd(double, const VectorXd&)>& grad_fs,
                            const VectorXd& theta, const EigenBasis& basis, double fd_step) {
    const Index q = theta.size();
    const Index m = basis.M();
    MatrixXd grads(m, q);
    if (grad_fs) {
        for (Index i = 0; i < m; ++i) grads.row(i) = grad_fs(basis.grid[i], theta).transpose();
    } else {
        for (Index k = 0; k < q; ++k) {
            const double h = fd_step * (1.0 + std::abs(theta[k]));
            VectorXd tp = theta, tm = theta;
            tp[k] += h;
            tm[k] -= h;
            for (Index i = 0; i < m; ++i)
                grads(i, k) = (f_s(basis.grid[i], tp) - f_s(basis.grid[i], tm)) / (2.0 * h);
        }
    }
    // a_j = w sum_i grads_i phi_j(s_i), accumulated for all j at once
    const MatrixXd a = basis.weight * (basis.eigfun.transpose() * grads);  // N x q
    MatrixXd w = MatrixXd::Zero(q, q);
    for (Index j = 0; j < basis.N(); ++j) {
        const double ev = basis.eigenvalues[j];
        w += a.row(j).transpose() * a.row(j) / (ev * ev);
    }
    return w;
}

MatrixXd theta_covariance(const MatrixXd& vmat, const MatrixXd& wmat, double sigma2, int n) {
    if (n < 1) throw ShapeError("covariance requires a positive sample size");
    Eigen::FullPivLU<MatrixXd> lu(vmat);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        throw SingularInformation("objective curvature is numerically singular at the optimum");
    const MatrixXd vinv = lu.inverse();
    MatrixXd cov = 4.0 * sigma2 / n * vinv * wmat * vinv;
    return (cov + cov.transpose()) / 2.0;
}

VectorXd stratified_normal_draws(double theta, double sd, int draws) {
    VectorXd out(draws);
    for (int i = 0; i < draws; ++i)
        out[i] = theta + sd * normal_quantile((i + 0.5) / draws);
    return out;
}

double interval_score(double lower, double upper, double truth, double level) {
    double s = upper - lower;
    const double f = 2.0 / (1.0 - level);
    if (truth < lower) s += f * (lower - truth);
    if (truth > upper) s += f * (truth - upper);
    return s;
}

namespace {

// per-draw residual surface delta_hat_d and its posterior sd envelope
struct ResidualGP {
    MatrixXd delta;  // grid x draws
    MatrixXd sd;     // grid x draws
};

ResidualGP fit_residual_gp(const Dataset& data, const std::function<double(double, const VectorXd&)>& f_s,
                           const MatrixXd& thetas, const VectorXd& xg, std::uint64_t seed) {
    const Index n = data.x.rows();
    const int draws = (int)thetas.rows();
    const KernelSpec kern = KernelSpec::matern_nu(1.5, 1.0);

    MatrixXd resid(n, draws);
    for (int d = 0; d < draws; ++d)
        for (Index i = 0; i < n; ++i)
            resid(i, d) = data.y[i] - f_s(data.x(i, 0), VectorXd(thetas.row(d).transpose()));

    // pick mu once, on the residuals at the central draw
    Dataset rd;
    rd.x = data.x;
    rd.y = resid.col(draws / 2);
    const double mu = select_mu_validation(rd, kern, default_mu_grid(), 0.3, seed);

    const MatrixXd r = kernel_matrix(data.x, kern).values;
    const CholFactor fac = chol_jitter(r + mu * MatrixXd::Identity(n, n), 0.0);
    const MatrixXd alpha = fac.solve(resid);  // n x draws

    const MatrixXd kg = kernel_cross(xg, VectorXd(data.x.col(0)), kern);  // grid x n
    ResidualGP out;
    out.delta = kg * alpha;

    // shared variance profile, scaled per draw by the plug-in amplitude
    const MatrixXd half = fac.half_solve(MatrixXd(kg.transpose()));  // n x grid
    VectorXd base(xg.size());
    for (Index i = 0; i < xg.size(); ++i) {
        const double v = kernel_eval(xg[i], xg[i], kern) - half.col(i).squaredNorm();
        base[i] = std::sqrt(std::max(v, 0.0));
    }
    out.sd.resize(xg.size(), draws);
    for (int d = 0; d < draws; ++d) {
        const double amp = std::max(resid.col(d).dot(alpha.col(d)) / n, 0.0);
        out.sd.col(d) = std::sqrt(amp) * base;
    }
    return out;
}

}  // namespace

VectorXd pointwise_quantile(const MatrixXd& values, double p) {
    VectorXd out(values.cols());
    for (Index j = 0; j < values.cols(); ++j) {
        std::vector<double> col(values.rows());
        for (Index i = 0; i < values.rows(); ++i) col[i] = values(i, j);
        out[j] = quantile(col, p);
    }
    return out;
}

UQReport uq_report(const UQInputs& in) {
    const Index q = in.theta.size();
    UQReport rep;
    rep.theta = in.theta;
    rep.sigma2 = in.sigma2;
    rep.level = in.config.level;
    rep.n = in.n;

    rep.vmat = curvature_matrix(in.objective, in.theta, in.config.hessian_step);
    const auto basis = cached_basis(KernelSpec::matern(1.0, in.config.basis_gamma),
                                    in.config.basis_m, in.config.basis_n);
    rep.wmat = information_matrix(in.f_s, in.grad_fs, in.theta, *basis, in.config.fd_theta_step);
    rep.covariance = theta_covariance(rep.vmat, rep.wmat, in.sigma2, in.n);

    const double z = normal_quantile((1.0 + in.config.level) / 2.0);
    rep.se.resize(q);
    rep.ci.resize(q, 2);
    for (Index k = 0; k < q; ++k) {
        rep.se[k] = std::sqrt(std::max(rep.covariance(k, k), 0.0));
        rep.ci(k, 0) = in.theta[k] - z * rep.se[k];
        rep.ci(k, 1) = in.theta[k] + z * rep.se[k];
    }

    if (in.config.band_grid < 2 || in.config.draws < 2) return rep;

    rep.band_x = linspace(0.0, 1.0, in.config.band_grid);
    MatrixXd thetas(in.config.draws, q);
    if (q == 1) {
        thetas.col(0) = stratified_normal_draws(in.theta[0], rep.se[0], in.config.draws);
    } else {
        Eigen::LLT<MatrixXd> llt(rep.covariance + 1e-14 * MatrixXd::Identity(q, q));
        Rng rng(derive_seed(in.config.seed, 0xba2dULL));
        for (int d = 0; d < in.config.draws; ++d)
            thetas.row(d) = (in.theta + llt.matrixL() * rng.normal_vec(q)).transpose();
    }

    MatrixXd fs_vals(in.config.draws, in.config.band_grid);
    for (int d = 0; d < in.config.draws; ++d)
        for (int j = 0; j < in.config.band_grid; ++j)
            fs_vals(d, j) = in.f_s(rep.band_x[j], VectorXd(thetas.row(d).transpose()));
    const double plo = (1.0 - in.config.level) / 2.0, phi = (1.0 + in.config.level) / 2.0;
    rep.fs_lower = pointwise_quantile(fs_vals, plo);
    rep.fs_upper = pointwise_quantile(fs_vals, phi);

    if (in.data) {
        const ResidualGP gp =
            fit_residual_gp(*in.data, in.f_s, thetas, rep.band_x, derive_seed(in.config.seed, 0x5eedULL));
        const MatrixXd up = fs_vals + (gp.delta + z * gp.sd).transpose();
        const MatrixXd lo = fs_vals + (gp.delta - z * gp.sd).transpose();
        rep.fp_upper = pointwise_quantile(up, phi);
        rep.fp_lower = pointwise_quantile(lo, plo);
    }
    return rep;
}

}  // namespace sobocal
