#pragma once

// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double binom(double u, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r *= (u - k + j) / j;
    return r;
}

inline double beta(double p, double q) {
    return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

// Explicit sum for the Jacobi polynomial, divided by its value at x = 1.
inline double jacobi_normalized(double a, double b, int n, double x) {
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        s += binom(n + a, n - k) * binom(n + b, k) * std::pow((x - 1.0) / 2.0, k) *
             std::pow((x + 1.0) / 2.0, n - k);
    }
    return s / binom(n + a, n);
}

// int_{-1}^{1} (1-x)^a (1+x)^b x^k dx, from integrating
// d/dx[(1-x)^(a+1) (1+x)^(b+1) x^k] by parts:
// (a+b+k+2) M_{k+1} = (b-a) M_k + k M_{k-1}.
inline double jacobi_moment(double a, double b, int k) {
    double prev = 0.0;
    double cur = std::pow(2.0, a + b + 1.0) * beta(a + 1.0, b + 1.0);
    for (int j = 0; j < k; ++j) {
        const double next = ((b - a) * cur + j * prev) / (a + b + j + 2.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double chebyshev_t(int j, double x) { return std::cos(j * std::acos(std::clamp(x, -1.0, 1.0))); }

// Plain Simpson rule on n (even) panels of [lo, hi].
inline double simpson(const std::function<double(double)>& g, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = g(lo) + g(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * g(lo + i * h);
    return s * h / 3.0;
}

struct Minimax {
    std::vector<double> coeffs;  // Chebyshev coefficients, degree n - 1
    double error = 0.0;
};

// Continuous Remez exchange for the unweighted uniform norm on [-1, 1],
// degree <= n - 1, reference located on a dense sample plus local refinement.
inline Minimax remez(const std::function<double(double)>& f, int n, int max_iter = 60) {
    const int m = n + 1;
    std::vector<double> ref(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) ref[static_cast<std::size_t>(k)] = -std::cos(k * std::numbers::pi / n);

    constexpr int kSamples = 20001;
    std::vector<double> xs(kSamples);
    for (int i = 0; i < kSamples; ++i) xs[static_cast<std::size_t>(i)] = -std::cos(i * std::numbers::pi / (kSamples - 1));

    Minimax out;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXd a(m, m);
        Eigen::VectorXd rhs(m);
        for (int k = 0; k < m; ++k) {
            for (int j = 0; j < n; ++j) a(k, j) = chebyshev_t(j, ref[static_cast<std::size_t>(k)]);
            a(k, n) = (k % 2 == 0) ? 1.0 : -1.0;
            rhs(k) = f(ref[static_cast<std::size_t>(k)]);
        }
        const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
        out.coeffs.assign(sol.data(), sol.data() + n);
        const double level = std::abs(sol(n));
        auto r = [&](double x) {
            double p = 0.0;
            for (int j = 0; j < n; ++j) p += out.coeffs[static_cast<std::size_t>(j)] * chebyshev_t(j, x);
            return f(x) - p;
        };

        // extrema of r per sign run, refined by ternary search
        std::vector<double> ext;
        std::vector<double> val;
        int sign = 0;
        for (double x : xs) {
            const double v = r(x);
            const int s = v >= 0.0 ? 1 : -1;
            if (s != sign) {
                ext.push_back(x);
                val.push_back(v);
                sign = s;
            } else if (std::abs(v) > std::abs(val.back())) {
                ext.back() = x;
                val.back() = v;
            }
        }
        const double step = 2.0 * std::numbers::pi / (kSamples - 1);
        for (std::size_t i = 0; i < ext.size(); ++i) {
            double lo = std::max(-1.0, std::cos(std::acos(std::clamp(ext[i], -1.0, 1.0)) + step));
            double hi = std::min(1.0, std::cos(std::acos(std::clamp(ext[i], -1.0, 1.0)) - step));
            for (int k = 0; k < 100; ++k) {
                const double c = lo + (hi - lo) / 3.0;
                const double d = hi - (hi - lo) / 3.0;
                if (std::abs(r(c)) < std::abs(r(d))) lo = c; else hi = d;
            }
            const double x = 0.5 * (lo + hi);
            if (std::abs(r(x)) > std::abs(val[i]) && (r(x) >= 0.0) == (val[i] >= 0.0)) {
                ext[i] = x;
                val[i] = r(x);
            }
        }
        while (static_cast<int>(ext.size()) > m) {
            if (std::abs(val.front()) <= std::abs(val.back())) {
                ext.erase(ext.begin());
                val.erase(val.begin());
            } else {
                ext.pop_back();
                val.pop_back();
            }
        }
        double top = 0.0;
        for (double v : val) top = std::max(top, std::abs(v));
        out.error = top;
        if (static_cast<int>(ext.size()) < m) break;
        ref = ext;
        if (top - level <= 1e-12 * top) break;
    }
    return out;
}

}  // namespace oracle
