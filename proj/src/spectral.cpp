#include "sobocal/spectral.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace sobocal {

EigenBasis nystrom_decompose(const KernelSpec& spec, int M, int N, bool clamp_rank) {
    if (M < N || N < 1) throw ShapeError("nystrom_decompose requires M >= N >= 1");
    EigenBasis b;
    b.base_spec = spec;
    b.grid = midpoint_grid(M);
    b.weight = 1.0 / M;

    const MatrixXd K = kernel_matrix(b.grid, spec).values;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
    if (es.info() != Eigen::Success)
        throw SobocalError("nystrom_decompose: eigendecomposition failed");

    // ascending from Eigen; keep the top N, descending
    const VectorXd vals = es.eigenvalues();
    const MatrixXd vecs = es.eigenvectors();
    int positive = 0;
    for (int i = 0; i < M; ++i)
        if (vals[i] * b.weight > 1e-12) ++positive;
    if (positive < N) {
        if (!clamp_rank)
            throw RankDeficientBasis("fewer than N eigenvalues above 1e-12");
        N = positive;
        if (N < 1) throw RankDeficientBasis("no eigenvalues above 1e-12");
    }

    b.eigenvalues.resize(N);
    b.eigfun.resize(M, N);
    const double sqw = std::sqrt(b.weight);
    for (int j = 0; j < N; ++j) {
        const int src = M - 1 - j;
        b.eigenvalues[j] = vals[src] * b.weight;
        VectorXd phi = vecs.col(src) / sqw;
        if (phi[0] < 0.0) phi = -phi;
        b.eigfun.col(j) = phi;
    }
    b.coeffs = b.weight * b.eigfun * b.eigenvalues.cwiseInverse().asDiagonal();
    return b;
}

MatrixXd nystrom_extend(const EigenBasis& basis, const VectorXd& points) {
    const MatrixXd kx = kernel_cross(points, basis.grid, basis.base_spec);
    return kx * basis.coeffs;
}

VectorXd nystrom_extend_point(const EigenBasis& basis, double x) {
    VectorXd p(1);
    p[0] = x;
    return nystrom_extend(basis, p).row(0);
}

double eigen_truncation_error(const EigenBasis& basis, const VectorXd& test_points) {
    const MatrixXd phi = nystrom_extend(basis, test_points);
    const VectorXd recon = phi.array().square().matrix() * basis.eigenvalues;
    double acc = 0.0;
    for (int i = 0; i < test_points.size(); ++i) {
        const double diag =
            kernel_eval(test_points[i], test_points[i], basis.base_spec);
        acc += std::fabs(diag - recon[i]);
    }
    return acc / test_points.size();
}

int truncation_default_N(double m) {
    if (std::fabs(m - 7.0 / 8.0) < 1e-9) return 20;
    if (std::fabs(m - 1.0) < 1e-9) return 12;
    if (std::fabs(m - 9.0 / 8.0) < 1e-9) return 12;
    if (std::fabs(m - 9.0 / 5.0) < 1e-9) return 5;
    if (std::fabs(m - 2.0) < 1e-9) return 5;
    // smoother spaces need fewer terms; coarse interpolation of the table
    return m >= 1.5 ? 5 : (m >= 1.0 ? 12 : 20);
}

double truncation_table_gamma(double m) { return std::sqrt(2.0 * m + 1.0); }

namespace {
using BasisKey = std::tuple<int, double, double, int, int, int>;
std::map<BasisKey, std::shared_ptr<const EigenBasis>> g_basis_cache;
std::mutex g_basis_mutex;
}  // namespace

std::shared_ptr<const EigenBasis> cached_basis(const KernelSpec& spec, int M, int N) {
    if (spec.family != KernelFamily::MaternHalfInteger)
        throw SobocalError("cached_basis: only base (Matern) kernels are decomposed");
    const BasisKey key{static_cast<int>(spec.family), spec.m, spec.gamma, spec.d, M, N};
    std::lock_guard<std::mutex> lock(g_basis_mutex);
    auto it = g_basis_cache.find(key);
    if (it != g_basis_cache.end()) return it->second;
    auto basis = std::make_shared<const EigenBasis>(nystrom_decompose(spec, M, N));
    g_basis_cache.emplace(key, basis);
    return basis;
}

}  // namespace sobocal
