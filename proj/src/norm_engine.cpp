#include "sobocal/norm_engine.hpp"

namespace sobocal {

NormSpace NormSpace::rkhs(const KernelSpec& kernel, const VectorXd& design) {
    NormSpace s;
    s.mode_ = NormMode::RkhsInterp;
    s.kernel_ = kernel;
    if (kernel.family == KernelFamily::PowerKernel) {
        kernel.validate();
        const EigenBasis& b = *kernel.power_base;
        s.spectral_ = true;
        s.design_ = b.grid;
        s.proj_ = b.eigfun;
        s.ev_beta_ = b.eigenvalues.array().pow(kernel.beta).matrix();
        s.quad_weight_ = b.weight;
        return s;
    }
    if (design.size() < 1) throw ShapeError("empty norm design");
    for (int i = 1; i < design.size(); ++i)
        if (design[i] == design[i - 1])
            throw ShapeError("norm design points must be pairwise distinct");
    s.design_ = design;
    const MatrixXd R = kernel_matrix(design, kernel).values;
    s.factor_ = chol_jitter(R);
    s.jitter_ = s.factor_.jitter;
    return s;
}

NormSpace NormSpace::l2(const VectorXd& design) {
    NormSpace s;
    s.mode_ = NormMode::EmpiricalL2;
    s.design_ = design;
    return s;
}

double NormSpace::norm_sq(const VectorXd& values) const {
    if (values.size() != design_.size())
        throw ShapeError("norm_sq: value vector does not match the design");
    if (mode_ == NormMode::EmpiricalL2) return values.squaredNorm() / values.size();
    if (spectral_) {
        const VectorXd c = proj_.transpose() * (quad_weight_ * values);
        return (c.array().square() / ev_beta_.array()).sum();
    }
    const VectorXd z = factor_.half_solve(values);
    return z.squaredNorm();
}

double sobolev_integer_norm_sq(const std::function<double(double)>& f, int m,
                               const VectorXd& grid) {
    VectorXd vals(grid.size());
    for (int i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);
    return sobolev_integer_norm_sq(vals, m, grid);
}

double sobolev_integer_norm_sq(const VectorXd& values, int m, const VectorXd& grid) {
    if (m < 0 || m > 2)
        throw UnsupportedOrder("integer Sobolev norms support m in {0, 1, 2}");
    const int n = static_cast<int>(grid.size());
    if (n < 200) throw UnsupportedOrder("integer Sobolev norms need >= 200 grid points");
    const double h = grid[1] - grid[0];
    for (int i = 1; i < n; ++i)
        if (std::fabs(grid[i] - grid[i - 1] - h) > 1e-9 * std::max(1.0, std::fabs(h)))
            throw UnsupportedOrder("integer Sobolev norms require an equispaced grid");

    double acc = trapezoid(values.array().square().matrix(), h);
    VectorXd deriv = values;
    for (int k = 1; k <= m; ++k) {
        deriv = gradient_order2(deriv, h);
        acc += trapezoid(deriv.array().square().matrix(), h);
    }
    return acc;
}

double interpolant_norm_bound(const NormSpace& space, const VectorXd& probe_grid) {
    if (space.mode() != NormMode::RkhsInterp)
        throw SobocalError("interpolant_norm_bound is defined for RKHS spaces");
    const VectorXd& design = space.design_points();
    double best = 0.0;
    for (int i = 0; i < probe_grid.size(); ++i) {
        const double x = probe_grid[i];
        double nearest = design[0];
        double dist = std::fabs(x - design[0]);
        for (int j = 1; j < design.size(); ++j) {
            const double dj = std::fabs(x - design[j]);
            if (dj < dist) {
                dist = dj;
                nearest = design[j];
            }
        }
        const double kxx = kernel_eval(x, x, space.kernel());
        const double kxn = kernel_eval(x, nearest, space.kernel());
        best = std::max(best, std::sqrt(std::max(0.0, kxx - kxn)));
    }
    return best;
}

}  // namespace sobocal
