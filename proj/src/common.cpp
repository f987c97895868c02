#include "sobocal/common.hpp"

namespace sobocal {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, uint64_t tag_a, uint64_t tag_b) {
    uint64_t s = splitmix64(master ^ 0x5851f42d4c957f2dULL);
    s = splitmix64(s ^ splitmix64(tag_a));
    s = splitmix64(s ^ splitmix64(tag_b ^ 0x14057b7ef767814fULL));
    return s;
}

Rng::Rng(uint64_t seed) : eng_(seed) {}

double Rng::uniform() {
    // 53-bit mantissa from the top bits of the engine output
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

VectorXd Rng::uniform_vec(int n, double lo, double hi) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
}

VectorXd Rng::normal_vec(int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(uniform() * (i + 1));
        if (j > i) j = i;
        std::swap(p[i], p[j]);
    }
    return p;
}

// Wichura's AS241 (PPND16): double-precision inverse normal CDF.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -HUGE_VAL;
        if (p == 1.0) return HUGE_VAL;
        throw SobocalError("normal_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double mean(const VectorXd& v) { return v.mean(); }

double sample_sd(const VectorXd& v) {
    const int n = static_cast<int>(v.size());
    if (n < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / (n - 1));
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw ShapeError("quantile of empty vector");
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = static_cast<size_t>(std::ceil(pos));
    const double frac = pos - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

VectorXd linspace(double a, double b, int n) {
    return VectorXd::LinSpaced(n, a, b);
}

VectorXd midpoint_grid(int m) {
    VectorXd g(m);
    for (int i = 0; i < m; ++i) g[i] = (i + 0.5) / m;
    return g;
}

double trapezoid(const VectorXd& y, double h) {
    const int n = static_cast<int>(y.size());
    if (n < 2) return 0.0;
    return h * (y.sum() - 0.5 * (y[0] + y[n - 1]));
}

VectorXd gradient_order2(const VectorXd& y, double h) {
    const int n = static_cast<int>(y.size());
    if (n < 3) throw ShapeError("gradient needs at least 3 points");
    VectorXd g(n);
    g[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    for (int i = 1; i < n - 1; ++i) g[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    g[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    return g;
}

double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (std::fabs(b - a) > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

Minimize1dResult minimize_grid_golden(const std::function<double(double)>& f,
                                      double lo, double hi, int ngrid, double tol) {
    Minimize1dResult res;
    VectorXd ths = linspace(lo, hi, ngrid);
    int best = 0;
    double bestv = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ngrid; ++i) {
        const double v = f(ths[i]);
        ++res.evals;
        if (v < bestv) {
            bestv = v;
            best = i;
        }
    }
    const double a = ths[std::max(0, best - 1)];
    const double b = ths[std::min(ngrid - 1, best + 1)];
    res.x = golden_section(f, a, b, tol);
    res.value = f(res.x);
    res.evals += 2;  // golden's own evals not tracked exactly; order of magnitude only
    return res;
}

}  // namespace sobocal
