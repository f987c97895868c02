#include "sobocal/models.hpp"

#include <cmath>

namespace sobocal {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double physical_truth_main(double x) {
    return std::exp(kPi * x / 5.0) * std::sin(2.0 * kPi * x);
}

double example1(double x, double theta, int reading) {
    const double s = std::sqrt(theta * theta - theta + 1.0);
    double bracket;
    if (reading == 0) {
        const double u = 20.0 * kPi * x * std::exp(-(theta * theta + theta));
        bracket = std::sin(u) + std::cos(20.0 * kPi * x) / (2.0 * std::exp(theta * theta) + 1.0) +
                  theta * theta;
    } else {
        // alternative parse: exp applies to theta^2 alone, and the +1 sits
        // inside the second exponential
        const double u = 20.0 * kPi * x / (std::exp(theta * theta) + theta);
        bracket = std::sin(u) + std::cos(20.0 * kPi * x) / (2.0 * std::exp(theta * theta + 1.0)) +
                  theta * theta;
    }
    return physical_truth_main(x) - 0.2 * s * bracket;
}

double example1_grad(double x, double theta) {
    const double s = std::sqrt(theta * theta - theta + 1.0);
    const double sp = (2.0 * theta - 1.0) / (2.0 * s);
    const double u = 20.0 * kPi * x * std::exp(-(theta * theta + theta));
    const double up = -(2.0 * theta + 1.0) * u;
    const double v = 2.0 * std::exp(theta * theta) + 1.0;
    const double vp = 4.0 * theta * std::exp(theta * theta);
    const double c = std::cos(20.0 * kPi * x);
    const double g = std::sin(u) + c / v + theta * theta;
    const double gp = std::cos(u) * up - c * vp / (v * v) + 2.0 * theta;
    return -0.2 * (sp * g + s * gp);
}

double example_c3(double x, double theta) {
    const double s = std::sqrt(theta * theta - theta + 1.0);
    return physical_truth_main(x) -
           s * (std::sin(2.0 * kPi * theta * x) + std::exp(kPi * theta * x / 2.0));
}

double example_c3_grad(double x, double theta) {
    const double s = std::sqrt(theta * theta - theta + 1.0);
    const double sp = (2.0 * theta - 1.0) / (2.0 * s);
    const double t = std::sin(2.0 * kPi * theta * x) + std::exp(kPi * theta * x / 2.0);
    const double tp = 2.0 * kPi * x * std::cos(2.0 * kPi * theta * x) +
                      (kPi * x / 2.0) * std::exp(kPi * theta * x / 2.0);
    return -(sp * t + s * tp);
}

Eigen::Matrix4d ion_channel_A(const VectorXd& theta) {
    if (theta.size() != 3)
        throw ShapeError("ion channel requires 3 rate parameters, got " +
                         std::to_string(theta.size()));
    const double t1 = theta[0], t2 = theta[1], t3 = theta[2];
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 0) = -t2 - t3;
    a(0, 1) = t1;
    a(1, 0) = t2;
    a(1, 1) = -t1 - t2;
    a(1, 2) = t1;
    a(2, 1) = t2;
    a(2, 2) = -t1 - t2;
    a(2, 3) = t1;
    a(3, 2) = t2;
    a(3, 3) = -t1;
    return a;
}

double ion_channel(double log_time, const VectorXd& theta) {
    const MatrixXd e = expm_pade6(std::exp(log_time) * ion_channel_A(theta));
    return e(0, 3);
}

MatrixXd expm_pade6(const MatrixXd& a) {
    if (a.rows() != a.cols()) throw ShapeError("matrix exponential requires a square matrix");
    static const double c[7] = {1.0,       1.0 / 2.0,    5.0 / 44.0,    1.0 / 66.0,
                                1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > 0.5) s = std::max(0, (int)std::ceil(std::log2(norm1 / 0.5)));
    const MatrixXd b = a / std::pow(2.0, s);
    const Index n = a.rows();
    const MatrixXd id = MatrixXd::Identity(n, n);
    const MatrixXd b2 = b * b;
    const MatrixXd b4 = b2 * b2;
    const MatrixXd b6 = b4 * b2;
    const MatrixXd u = b * (c[1] * id + c[3] * b2 + c[5] * b4);
    const MatrixXd v = c[0] * id + c[2] * b2 + c[4] * b4 + c[6] * b6;
    MatrixXd f = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < s; ++i) f = f * f;
    return f;
}

ExperimentModel get_model(const std::string& name, int example1_reading) {
    ExperimentModel m;
    m.name = name;
    if (name == "example1") {
        m.f_p = physical_truth_main;
        m.f_s = [example1_reading](double x, const VectorXd& th) {
            return example1(x, th[0], example1_reading);
        };
        if (example1_reading == 0)
            m.grad_fs = [](double x, const VectorXd& th) {
                VectorXd g(1);
                g[0] = example1_grad(x, th[0]);
                return g;
            };
        m.bounds = MatrixXd(1, 2);
        m.bounds << -1.0, 3.0;
        m.sigma2_default = 0.05;
    } else if (name == "example2") {
        m.f_p = physical_truth_main;  // GP prior mean; truth drawn per trial
        m.gp_truth = true;
        m.gp_variance = 0.1;
        m.gp_kernel = KernelSpec::matern_nu(1.5, 1.0);
        m.f_s = [](double x, const VectorXd& th) { return example_c3(x, th[0]); };
        m.grad_fs = [](double x, const VectorXd& th) {
            VectorXd g(1);
            g[0] = example_c3_grad(x, th[0]);
            return g;
        };
        m.bounds = MatrixXd(1, 2);
        m.bounds << -1.0, 2.0;
        m.sigma2_default = 0.05;
    } else if (name == "example_c3") {
        m.f_p = physical_truth_main;
        m.f_s = [](double x, const VectorXd& th) { return example_c3(x, th[0]); };
        m.grad_fs = [](double x, const VectorXd& th) {
            VectorXd g(1);
            g[0] = example_c3_grad(x, th[0]);
            return g;
        };
        m.bounds = MatrixXd(1, 2);
        m.bounds << -1.0, 1.0;
        m.sigma2_default = 0.05;
    } else if (name == "ion_channel") {
        m.q = 3;
        m.f_s = [](double x, const VectorXd& th) { return ion_channel(x, th); };
        m.bounds = MatrixXd(3, 2);
        m.bounds << 0.05, 5.0, 0.05, 5.0, 0.05, 5.0;
        m.sigma2_default = 1e-4;
    } else {
        throw ConfigError("unknown model '" + name + "'");
    }
    return m;
}

}  // namespace sobocal
