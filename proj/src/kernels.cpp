#include "sobocal/kernels.hpp"

#include <sstream>

#include "sobocal/spectral.hpp"

namespace sobocal {

KernelSpec KernelSpec::matern(double m, double gamma, int d) {
    KernelSpec s;
    s.family = KernelFamily::MaternHalfInteger;
    s.m = m;
    s.gamma = gamma;
    s.d = d;
    s.validate();
    return s;
}

KernelSpec KernelSpec::matern_nu(double nu, double gamma, int d) {
    return matern(nu + d / 2.0, gamma, d);
}

KernelSpec KernelSpec::power(std::shared_ptr<const EigenBasis> base, double beta) {
    if (!base) throw MissingBasis("power kernel requires a decomposed base");
    KernelSpec s;
    s.family = KernelFamily::PowerKernel;
    s.power_base = std::move(base);
    s.beta = beta;
    s.d = s.power_base->base_spec.d;
    s.gamma = s.power_base->base_spec.gamma;
    s.m = beta * s.power_base->base_spec.m;
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (gamma <= 0.0) throw SobocalError("kernel length scale must be positive");
    if (family == KernelFamily::MaternHalfInteger) {
        const double v = nu();
        if (std::fabs(v - 0.5) > 1e-12 && std::fabs(v - 1.5) > 1e-12 &&
            std::fabs(v - 2.5) > 1e-12) {
            std::ostringstream os;
            os << "unsupported Matern order nu=" << v
               << "; closed forms exist for nu in {1/2, 3/2, 5/2}";
            throw UnsupportedSmoothness(os.str());
        }
    } else {
        if (beta < 0.0 || beta > 1.0)
            throw InvalidExponent("power kernel exponent must lie in [0, 1]");
        if (!power_base || power_base->eigenvalues.size() == 0)
            throw MissingBasis("power kernel base decomposition is empty");
    }
}

std::string KernelSpec::describe() const {
    std::ostringstream os;
    if (family == KernelFamily::MaternHalfInteger)
        os << "matern(m=" << m << ", gamma=" << gamma << ", d=" << d << ")";
    else
        os << "power(beta=" << beta << ", base=" << power_base->base_spec.describe()
           << ", N=" << power_base->eigenvalues.size() << ")";
    return os.str();
}

double matern_scalar(double r, double nu) {
    if (std::fabs(nu - 0.5) < 1e-12) return std::exp(-r);
    if (std::fabs(nu - 1.5) < 1e-12) return (1.0 + r) * std::exp(-r);
    if (std::fabs(nu - 2.5) < 1e-12) return (1.0 + r + r * r / 3.0) * std::exp(-r);
    throw UnsupportedSmoothness("matern_scalar: nu not in {1/2, 3/2, 5/2}");
}

double matern_eval(double x, double y, const KernelSpec& spec) {
    return matern_scalar(spec.gamma * std::fabs(x - y), spec.nu());
}

double matern_eval(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y,
                   const KernelSpec& spec) {
    return matern_scalar(spec.gamma * (x - y).norm(), spec.nu());
}

double power_kernel_eval(double x, double y, const KernelSpec& spec) {
    if (spec.family != KernelFamily::PowerKernel)
        throw SobocalError("power_kernel_eval: spec is not a power kernel");
    spec.validate();
    const EigenBasis& b = *spec.power_base;
    const VectorXd ex = nystrom_extend_point(b, x);
    const VectorXd ey = (x == y) ? ex : nystrom_extend_point(b, y);
    double acc = 0.0;
    for (int j = 0; j < b.eigenvalues.size(); ++j)
        acc += std::pow(b.eigenvalues[j], spec.beta) * ex[j] * ey[j];
    return acc;
}

double kernel_eval(double x, double y, const KernelSpec& spec) {
    if (spec.family == KernelFamily::MaternHalfInteger) return matern_eval(x, y, spec);
    return power_kernel_eval(x, y, spec);
}

KernelMatrix kernel_matrix(const MatrixXd& points, const KernelSpec& spec,
                           double jitter) {
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw ShapeError("kernel_matrix: no points");
    KernelMatrix km;
    km.jitter = jitter;
    if (spec.family == KernelFamily::MaternHalfInteger) {
        const double nu = spec.nu();
        km.values.resize(n, n);
        for (int i = 0; i < n; ++i) {
            km.values(i, i) = 1.0;
            for (int j = i + 1; j < n; ++j) {
                const double r = spec.gamma * (points.row(i) - points.row(j)).norm();
                const double v = matern_scalar(r, nu);
                km.values(i, j) = v;
                km.values(j, i) = v;
            }
        }
    } else {
        if (points.cols() != 1)
            throw ShapeError("power kernels are decomposed on a 1-d grid");
        const EigenBasis& b = *spec.power_base;
        const MatrixXd phi = nystrom_extend(b, points.col(0));
        const VectorXd evb =
            b.eigenvalues.array().pow(spec.beta).matrix();
        km.values = phi * evb.asDiagonal() * phi.transpose();
        km.values = 0.5 * (km.values + km.values.transpose()).eval();
    }
    if (jitter > 0.0) km.values.diagonal().array() += jitter;
    return km;
}

KernelMatrix kernel_matrix(const VectorXd& points, const KernelSpec& spec,
                           double jitter) {
    MatrixXd p(points.size(), 1);
    p.col(0) = points;
    return kernel_matrix(p, spec, jitter);
}

MatrixXd kernel_cross(const MatrixXd& a, const MatrixXd& b, const KernelSpec& spec) {
    if (spec.family != KernelFamily::MaternHalfInteger) {
        if (a.cols() != 1 || b.cols() != 1)
            throw ShapeError("power kernels are decomposed on a 1-d grid");
        const EigenBasis& eb = *spec.power_base;
        const MatrixXd pa = nystrom_extend(eb, a.col(0));
        const MatrixXd pb = nystrom_extend(eb, b.col(0));
        const VectorXd evb = eb.eigenvalues.array().pow(spec.beta).matrix();
        return pa * evb.asDiagonal() * pb.transpose();
    }
    const double nu = spec.nu();
    MatrixXd out(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.rows(); ++j) {
            const double r = spec.gamma * (a.row(i) - b.row(j)).norm();
            out(i, j) = matern_scalar(r, nu);
        }
    return out;
}

MatrixXd kernel_cross(const VectorXd& a, const VectorXd& b, const KernelSpec& spec) {
    MatrixXd ma(a.size(), 1), mb(b.size(), 1);
    ma.col(0) = a;
    mb.col(0) = b;
    return kernel_cross(ma, mb, spec);
}

VectorXd CholFactor::half_solve(const VectorXd& g) const {
    return L.triangularView<Eigen::Lower>().solve(g);
}

MatrixXd CholFactor::half_solve(const MatrixXd& g) const {
    return L.triangularView<Eigen::Lower>().solve(g);
}

VectorXd CholFactor::solve(const VectorXd& g) const {
    VectorXd z = L.triangularView<Eigen::Lower>().solve(g);
    return L.transpose().triangularView<Eigen::Upper>().solve(z);
}

MatrixXd CholFactor::solve(const MatrixXd& g) const {
    MatrixXd z = L.triangularView<Eigen::Lower>().solve(g);
    return L.transpose().triangularView<Eigen::Upper>().solve(z);
}

CholFactor chol_jitter(const MatrixXd& a, double j0, double jmax) {
    double j = j0;
    while (true) {
        MatrixXd m = a;
        if (j > 0.0) m.diagonal().array() += j;
        Eigen::LLT<MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            CholFactor f;
            f.L = llt.matrixL();
            f.jitter = j;
            return f;
        }
        j = (j == 0.0) ? std::max(j0, 1e-10) : j * 10.0;
        if (j > jmax * 10.0 + 1e-300)
            throw NotPositiveDefinite(
                "matrix not positive definite after jitter escalation");
    }
}

}  // namespace sobocal
