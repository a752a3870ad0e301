#include "wmod/approx.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "wmod/numeric.hpp"
#include "wmod/polybasis.hpp"

namespace wmod {

double PolyCoeffs::operator()(double x) const {
    double b1 = 0.0;
    double b2 = 0.0;
    for (int j = degree(); j >= 1; --j) {
        const double b0 = coeffs[static_cast<std::size_t>(j)] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs[0] + x * b1 - b2;
}

namespace {

constexpr double kExactTol = 1e-12;

struct Grid {
    Eigen::VectorXd x;
    Eigen::VectorXd values;  // f(x)
    Eigen::VectorXd scale;   // sigma(x)^alpha
    Eigen::VectorXd mass;    // quadrature weights (finite p only)
    Eigen::MatrixXd basis;   // T_j(x_k)
};

// Clenshaw-Curtis weights on the Chebyshev-Lobatto points cos(k pi / m), k = 0..m.
std::vector<double> clenshaw_curtis(int m) {
    std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
    const double pi = std::numbers::pi;
    for (int k = 0; k <= m; ++k) {
        double s = 0.0;
        for (int j = 1; j <= m / 2; ++j) {
            const double b = (2 * j == m) ? 1.0 : 2.0;
            s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * pi / m);
        }
        const double c = (k == 0 || k == m) ? 1.0 : 2.0;
        w[static_cast<std::size_t>(k)] = c / m * (1.0 - s);
    }
    return w;
}

Grid fill_grid(const FunctionHandle& f, int n, const WeightParams& w, const SigmaWeight& sw,
               const std::vector<double>& xs, const std::vector<double>& mass);

Grid build_grid(const FunctionHandle& f, int n, const WeightParams& w, const SigmaWeight& sw,
                const ApproxOptions& opts) {
    const int m = opts.density_slope * n + opts.density_offset;
    std::vector<double> inner;
    for (double b : f.breakpoints) {
        if (b > -1.0 && b < 1.0) inner.push_back(b);
    }
    std::vector<double> xs;
    std::vector<double> mass;
    if (w.is_uniform()) {
        for (int k = m; k >= 0; --k) xs.push_back(std::cos(k * std::numbers::pi / m));
        xs.insert(xs.end(), inner.begin(), inner.end());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    } else if (inner.empty()) {
        const std::vector<double> cc = clenshaw_curtis(m);
        for (int k = m; k >= 0; --k) {
            xs.push_back(std::cos(k * std::numbers::pi / m));
            mass.push_back(cc[static_cast<std::size_t>(k)]);
        }
    } else {
        // Composite graded rule split at the breakpoints of f.
        const int pieces = static_cast<int>(inner.size()) + 1;
        const QuadratureRule rule = graded_rule(-1.0, 1.0, inner, (m + pieces) / pieces);
        xs = rule.nodes;
        mass = rule.weights;
    }

    return fill_grid(f, n, w, sw, xs, mass);
}

Grid fill_grid(const FunctionHandle& f, int n, const WeightParams& w, const SigmaWeight& sw,
               const std::vector<double>& xs, const std::vector<double>& mass) {
    Grid g;
    const Eigen::Index rows = static_cast<Eigen::Index>(xs.size());
    g.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), rows);
    g.values.resize(rows);
    g.scale.resize(rows);
    g.mass = mass.empty() ? Eigen::VectorXd::Ones(rows)
                          : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(mass.data(), rows));
    g.basis.resize(rows, n);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double x = g.x(i);
        g.values(i) = f(x);
        if (!std::isfinite(g.values(i))) throw std::domain_error("non-finite f on the grid");
        g.scale(i) = w.alpha == 0.0 ? 1.0 : std::pow(std::max(0.0, sw(x)), w.alpha);
        double t0 = 1.0;
        double t1 = x;
        g.basis(i, 0) = 1.0;
        if (n > 1) g.basis(i, 1) = x;
        for (int j = 2; j < n; ++j) {
            const double t2 = 2.0 * x * t1 - t0;
            g.basis(i, j) = t2;
            t0 = t1;
            t1 = t2;
        }
    }
    return g;
}

// min sum_k weight_k (values_k - (basis c)_k)^2 with weight_k = row_weight_k * scale_k^2.
Eigen::VectorXd weighted_lsq(const Grid& g, const Eigen::VectorXd& row_weight) {
    const Eigen::VectorXd root = (row_weight.array().max(0.0).sqrt() * g.scale.array()).matrix();
    const Eigen::MatrixXd a = root.asDiagonal() * g.basis;
    const Eigen::VectorXd b = root.cwiseProduct(g.values);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-13);
    if (qr.rank() < a.cols()) {
        throw RankDeficiencyError("weighted least-squares system is rank deficient");
    }
    return qr.solve(b);
}

Eigen::VectorXd residual(const Grid& g, const Eigen::VectorXd& c) {
    return (g.values - g.basis * c).cwiseProduct(g.scale);
}

PolyCoeffs to_poly(const Eigen::VectorXd& c) {
    return PolyCoeffs{std::vector<double>(c.data(), c.data() + c.size())};
}

Eigen::VectorXd from_poly(const PolyCoeffs& p, Eigen::Index n) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(n, p.degree() + 1); ++j) {
        c(j) = p.coeffs[static_cast<std::size_t>(j)];
    }
    return c;
}

struct SolveOutcome {
    Eigen::VectorXd coeffs;
    int iterations = 0;
    bool converged = true;
};

// Alternating extrema of r over the sign runs of the points with positive
// weight, trimmed from the ends (smaller end first) down to `count`.
std::vector<Eigen::Index> alternating_reference(const Grid& g, const Eigen::VectorXd& r,
                                                Eigen::Index count) {
    std::vector<Eigen::Index> picks;
    int run_sign = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (!(g.scale(i) > 0.0) || r(i) == 0.0) continue;
        const int sign = r(i) > 0.0 ? 1 : -1;
        if (sign != run_sign) {
            picks.push_back(i);
            run_sign = sign;
        } else if (std::abs(r(i)) > std::abs(r(picks.back()))) {
            picks.back() = i;
        }
    }
    std::size_t lo = 0;
    std::size_t hi = picks.size();
    while (hi - lo > static_cast<std::size_t>(count)) {
        if (std::abs(r(picks[lo])) <= std::abs(r(picks[hi - 1]))) {
            ++lo;
        } else {
            --hi;
        }
    }
    return {picks.begin() + static_cast<std::ptrdiff_t>(lo),
            picks.begin() + static_cast<std::ptrdiff_t>(hi)};
}

// Discrete exchange iteration on the grid, seeded by a near-optimal iterate.
// On success returns coefficients whose max residual is within gap_tol of
// the levelled reference error (a lower bound for the discrete optimum).
bool exchange_polish(const Grid& g, Eigen::VectorXd& coeffs, double& upper, double& lower,
                     double gap_tol) {
    const Eigen::Index n = g.basis.cols();
    Eigen::VectorXd c = coeffs;
    std::vector<Eigen::Index> ref = alternating_reference(g, residual(g, c), n + 1);
    for (int it = 0; it < 60; ++it) {
        if (static_cast<Eigen::Index>(ref.size()) < n + 1) return false;
        Eigen::MatrixXd sys(n + 1, n + 1);
        Eigen::VectorXd rhs(n + 1);
        for (Eigen::Index k = 0; k <= n; ++k) {
            const Eigen::Index i = ref[static_cast<std::size_t>(k)];
            sys.row(k).head(n) = g.scale(i) * g.basis.row(i);
            sys(k, n) = (k % 2 == 0) ? 1.0 : -1.0;
            rhs(k) = g.scale(i) * g.values(i);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
        if (!lu.isInvertible()) return false;
        const Eigen::VectorXd sol = lu.solve(rhs);
        c = sol.head(n);
        const double level = std::abs(sol(n));
        const Eigen::VectorXd r = residual(g, c);
        const double top = r.cwiseAbs().maxCoeff();
        if (!std::isfinite(top)) return false;
        if (top < upper) {
            upper = top;
            coeffs = c;
        }
        lower = std::max(lower, level);
        if (upper - lower <= gap_tol * upper) return true;
        std::vector<Eigen::Index> next = alternating_reference(g, r, n + 1);
        if (next == ref) return false;
        ref = std::move(next);
    }
    return false;
}

SolveOutcome lawson(const Grid& g, const ApproxOptions& opts, const PolyCoeffs* start) {
    const Eigen::Index rows = g.x.size();
    Eigen::VectorXd u = Eigen::VectorXd::Constant(rows, 1.0 / rows);
    if (start != nullptr) {
        const Eigen::VectorXd r0 = residual(g, from_poly(*start, g.basis.cols())).cwiseAbs();
        const double s = r0.sum();
        if (s > 0.0) u = 0.5 * u + 0.5 * r0 / s;
    }

    SolveOutcome out;
    out.converged = false;
    double best_upper = kInf;
    double lower = 0.0;
    double prev_lower = 0.0;
    const double exact = kExactTol * std::max(1.0, g.values.cwiseAbs().maxCoeff());
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::VectorXd c = weighted_lsq(g, u);
        const Eigen::VectorXd r = residual(g, c);
        const Eigen::VectorXd ar = r.cwiseAbs();
        const double upper = ar.maxCoeff();
        lower = std::max(lower, std::sqrt(u.dot(r.cwiseProduct(r))));
        out.iterations = it;
        if (upper < best_upper) {
            best_upper = upper;
            out.coeffs = c;
        }
        if (best_upper - lower <= opts.gap_tol * best_upper || best_upper <= exact) {
            out.converged = true;
            break;
        }
        if (it == opts.exchange_after &&
            exchange_polish(g, out.coeffs, best_upper, lower, opts.gap_tol)) {
            out.converged = true;
            break;
        }
        if (it > 1 && std::abs(lower - prev_lower) <= opts.stagnation_tol * best_upper) break;
        prev_lower = lower;
        const double s = u.dot(ar);
        if (!(s > 0.0)) break;
        u = u.cwiseProduct(ar) / s;
    }
    return out;
}

// Continuous polish for p = infinity: locate the true local maxima of the
// weighted residual near the grid peaks, add them to the grid and re-level,
// until the grid maximum matches the continuous one to gap_tol.
Grid refine_uniform(const FunctionHandle& f, int n, const WeightParams& w, const SigmaWeight& sw,
                    Grid g, SolveOutcome& sol, const ApproxOptions& opts) {
    for (int round = 0; round < opts.refine_rounds; ++round) {
        const PolyCoeffs poly = to_poly(sol.coeffs);
        const auto h = [&](double x) {
            const double s = w.alpha == 0.0 ? 1.0 : std::pow(std::max(0.0, sw(x)), w.alpha);
            return std::abs((f(x) - poly(x)) * s);
        };
        const Eigen::VectorXd r = residual(g, sol.coeffs).cwiseAbs();
        const double grid_max = r.maxCoeff();
        if (!(grid_max > 0.0)) break;
        std::vector<double> added;
        double cont_max = grid_max;
        const Eigen::Index last = r.size() - 1;
        for (Eigen::Index i = 0; i <= last; ++i) {
            if (r(i) < 0.5 * grid_max) continue;
            if ((i > 0 && r(i - 1) > r(i)) || (i < last && r(i + 1) > r(i))) continue;
            for (Eigen::Index j : {i - 1, i + 1}) {
                if (j < 0 || j > last) continue;
                const double lo = std::min(g.x(i), g.x(j));
                const double hi = std::max(g.x(i), g.x(j));
                const LineMax m = golden_section_argmax(h, lo, hi, 1e-12 * (hi - lo + 1e-300) + 1e-15);
                if (m.value > r(i)) {
                    added.push_back(m.x);
                    cont_max = std::max(cont_max, m.value);
                }
            }
        }
        if (added.empty() || cont_max - grid_max <= opts.gap_tol * cont_max) break;
        std::vector<double> xs(g.x.data(), g.x.data() + g.x.size());
        xs.insert(xs.end(), added.begin(), added.end());
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        g = fill_grid(f, n, w, sw, xs, {});
        double upper = residual(g, sol.coeffs).cwiseAbs().maxCoeff();
        double lower = 0.0;
        Eigen::VectorXd c = sol.coeffs;
        const bool ok = exchange_polish(g, c, upper, lower, opts.gap_tol);
        sol.coeffs = c;
        if (!ok) break;
    }
    return g;
}

double lp_objective(const Grid& g, const Eigen::VectorXd& c, double p) {
    const Eigen::ArrayXd r = residual(g, c).array().abs();
    return (g.mass.array() * r.pow(p)).sum();
}

SolveOutcome irls(const Grid& g, double p, const ApproxOptions& opts, const PolyCoeffs* start) {
    SolveOutcome out;
    Eigen::VectorXd c = start != nullptr ? from_poly(*start, g.basis.cols())
                                         : weighted_lsq(g, g.mass);
    if (p == 2.0) {
        out.coeffs = weighted_lsq(g, g.mass);
        out.iterations = 1;
        return out;
    }
    const double damping = p < 2.0 ? 0.5 : 1.0;
    double obj = lp_objective(g, c, p);
    out.converged = false;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::ArrayXd r = residual(g, c).array().abs();
        const double floor = std::max(1e-10 * r.maxCoeff(), 1e-300);
        const Eigen::VectorXd weights = (g.mass.array() * r.max(floor).pow(p - 2.0)).matrix();
        const Eigen::VectorXd next = weighted_lsq(g, weights);
        const Eigen::VectorXd trial = c + damping * (next - c);
        const double trial_obj = lp_objective(g, trial, p);
        out.iterations = it;
        const bool improved = trial_obj <= obj;
        if (improved) c = trial;
        const double change = std::abs(obj - trial_obj) / std::max(obj, 1e-300);
        if (improved) obj = trial_obj;
        if (change <= opts.stagnation_tol || obj <= 1e-300) {
            out.converged = true;
            break;
        }
        if (!improved) {
            out.converged = true;
            break;
        }
    }
    out.coeffs = c;
    return out;
}

}  // namespace

ApproxResult best_approx(const FunctionHandle& f, int n, const WeightParams& w,
                         const SigmaWeight& sw, const ApproxOptions& opts,
                         const PolyCoeffs* start) {
    if (n < 1) throw std::invalid_argument("best_approx requires n >= 1");
    Grid g = build_grid(f, n, w, sw, opts);
    SolveOutcome sol = w.is_uniform() ? lawson(g, opts, start) : irls(g, w.p, opts, start);
    if (w.is_uniform()) g = refine_uniform(f, n, w, sw, std::move(g), sol, opts);

    ApproxResult result;
    result.poly = to_poly(sol.coeffs);
    result.iterations = sol.iterations;
    result.converged = sol.converged;
    const Eigen::VectorXd r = residual(g, sol.coeffs);
    result.grid_error = w.is_uniform()
                            ? r.cwiseAbs().maxCoeff()
                            : std::pow(lp_objective(g, sol.coeffs, w.p), 1.0 / w.p);

    const PolyCoeffs& poly = result.poly;
    const RealFn diff = [&f, &poly](double x) { return f(x) - poly(x); };
    result.error = weighted_norm(diff, f.breakpoints, w, sw, opts.norm);
    const double size = weighted_norm(f, w, sw, opts.norm);
    if (result.error <= kExactTol * std::max(1.0, size)) {
        result.error = 0.0;
        result.grid_error = 0.0;
    }
    return result;
}

ApproxResult best_approx(const FunctionHandle& f, int n, const WeightParams& w,
                         const SigmaWeight& sw, const ApproxOptions& opts) {
    return best_approx(f, n, w, sw, opts, nullptr);
}

ErrorSequence error_sequence(const FunctionHandle& f, const std::vector<int>& n_values,
                             const WeightParams& w, const SigmaWeight& sw,
                             const ApproxOptions& opts) {
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < 1 || (i > 0 && n_values[i] <= n_values[i - 1])) {
            throw std::invalid_argument("error_sequence requires increasing n >= 1");
        }
    }
    ErrorSequence seq;
    seq.f_label = f.label;
    seq.w = w;
    seq.n_values = n_values;
    PolyCoeffs best_poly;
    double best_error = kInf;
    bool have_start = false;
    for (int n : n_values) {
        try {
            ApproxResult res =
                best_approx(f, n, w, sw, opts, have_start ? &best_poly : nullptr);
            if (res.error <= best_error) {
                best_error = res.error;
                best_poly = res.poly;
            }
            have_start = true;
            seq.errors.push_back(best_error);
            seq.converged.push_back(res.converged);
            seq.failures.emplace_back();
        } catch (const std::exception& e) {
            seq.errors.push_back(std::nan(""));
            seq.converged.push_back(false);
            seq.failures.emplace_back(e.what());
        }
    }
    return seq;
}

void write_csv(std::ostream& out, const ErrorSequence& seq, const std::string& fingerprint) {
    out << "# f_label=" << seq.f_label << "\n";
    out << "# " << describe(seq.w) << "\n";
    out << "# kernel=" << fingerprint << "\n";
    out << "n,E_n\n";
    for (std::size_t i = 0; i < seq.n_values.size(); ++i) {
        out << seq.n_values[i] << "," << format_real(seq.errors[i]) << "\n";
    }
    for (std::size_t i = 0; i < seq.failures.size(); ++i) {
        if (!seq.failures[i].empty()) {
            out << "# failed n=" << seq.n_values[i] << ": " << seq.failures[i] << "\n";
        }
    }
}

}  // namespace wmod
