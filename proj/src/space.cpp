#include "wmod/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "wmod/numeric.hpp"
#include "wmod/polybasis.hpp"

namespace wmod {

WeightParams::WeightParams(double p_, double alpha_) : p(p_), alpha(alpha_) {
    if (!(p >= 1.0)) throw std::invalid_argument("weight exponent p must be >= 1");
    if (!std::isfinite(alpha)) throw std::invalid_argument("weight power alpha must be finite");
}

std::string format_p(double p) {
    if (p == kInf) return "inf";
    return format_real(p);
}

double parse_p(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "inf" || t == "infinity") return kInf;
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || !(v >= 1.0) ||
        !std::isfinite(v)) {
        throw std::invalid_argument("invalid p: '" + std::string(text) + "'");
    }
    return v;
}

std::string describe(const WeightParams& w) {
    return "p=" + format_p(w.p) + ",alpha=" + format_real(w.alpha);
}

FunctionHandle constant_function(double c) {
    std::ostringstream label;
    label << "const_" << c;
    return {[c](double) { return c; }, label.str(), {{"gamma", "analytic"}}, {}};
}

FunctionHandle linear_combination(double a, const FunctionHandle& f, double b,
                                  const FunctionHandle& g) {
    std::vector<double> breaks = f.breakpoints;
    breaks.insert(breaks.end(), g.breakpoints.begin(), g.breakpoints.end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::ostringstream label;
    label << a << "*" << f.label << "+" << b << "*" << g.label;
    return {[a, b, fe = f.eval, ge = g.eval](double x) { return a * fe(x) + b * ge(x); },
            label.str(), {}, std::move(breaks)};
}

FunctionHandle scaled(double c, const FunctionHandle& f) {
    std::ostringstream label;
    label << c << "*" << f.label;
    return {[c, fe = f.eval](double x) { return c * fe(x); }, label.str(), f.metadata,
            f.breakpoints};
}

namespace {

double weight_factor(const SigmaWeight& sw, double alpha, double x) {
    if (alpha == 0.0) return 1.0;
    return std::pow(sw(x), alpha);
}

double sup_norm(const RealFn& g, std::span<const double> breaks, double alpha,
                const SigmaWeight& sw, int samples, double refine_tol) {
    if (samples < 3) throw std::invalid_argument("sup norm needs at least 3 samples");
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(samples) + breaks.size());
    for (int k = samples; k >= 1; --k) {
        xs.push_back(std::cos(k * std::numbers::pi / (samples + 1)));
    }
    for (double b : breaks) {
        if (b > -1.0 && b < 1.0) xs.push_back(b);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto h = [&](double x) { return std::abs(g(x) * weight_factor(sw, alpha, x)); };
    std::vector<double> vals(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        vals[i] = h(xs[i]);
        if (!std::isfinite(vals[i])) {
            throw std::domain_error("non-finite weighted value at x = " + std::to_string(xs[i]));
        }
    }

    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return vals[i] > vals[j]; });

    double best = vals[order.front()];
    std::vector<std::size_t> refined;
    for (std::size_t idx : order) {
        if (refined.size() == 3) break;
        bool near = false;
        for (std::size_t r : refined) near = near || (idx + 1 >= r && idx <= r + 1);
        if (near) continue;
        refined.push_back(idx);
        const double lo = idx == 0 ? -1.0 + 1e-12 : xs[idx - 1];
        const double hi = idx + 1 == xs.size() ? 1.0 - 1e-12 : xs[idx + 1];
        const double left = golden_section_max(h, lo, xs[idx], refine_tol);
        const double right = golden_section_max(h, xs[idx], hi, refine_tol);
        best = std::max({best, left, right});
        if (!std::isfinite(best)) return kInf;
    }
    return best;
}

}  // namespace

double weighted_norm(const RealFn& g, std::span<const double> breaks, const WeightParams& w,
                     const SigmaWeight& sw, const NormResolution& res) {
    if (w.is_uniform()) return sup_norm(g, breaks, w.alpha, sw, res.sup_samples, res.refine_tol);

    std::vector<double> inner;
    for (double b : breaks) {
        if (b > -1.0 && b < 1.0) inner.push_back(b);
    }
    const int pieces = static_cast<int>(inner.size()) + 1;
    const int per_piece = std::max(16, res.quad_nodes / (2 * pieces));
    const QuadratureRule rule = graded_rule(-1.0, 1.0, inner, per_piece);
    const double p = w.p;
    const double total = integrate(rule, [&](double x) {
        const double v = std::abs(g(x) * weight_factor(sw, w.alpha, x));
        return p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p));
    });
    if (!std::isfinite(total)) return kInf;
    return p == 1.0 ? total : (p == 2.0 ? std::sqrt(total) : std::pow(total, 1.0 / p));
}

double weighted_norm(const FunctionHandle& f, const WeightParams& w, const SigmaWeight& sw,
                     const NormResolution& res) {
    return weighted_norm(f.eval, f.breakpoints, w, sw, res);
}

std::string to_string(Theorem th) {
    switch (th) {
        case Theorem::jackson: return "jackson";
        case Theorem::inverse: return "inverse";
        case Theorem::direct: return "direct";
        case Theorem::coincidence: return "coincidence";
    }
    return "unknown";
}

bool admissible_for(const WeightParams& w, Theorem th) {
    const double p = w.p;
    const double a = w.alpha;
    if (!(p >= 1.0)) return false;
    if (p == kInf) return a >= 1.0 && a < 1.5;
    const double lo = 1.0 - 1.0 / (2.0 * p);
    const double hi = 1.5 - 1.0 / (2.0 * p);
    if (th == Theorem::jackson && p == 1.0) return a > 0.5 && a <= 1.0;
    return a > lo && a < hi;
}

namespace {

std::string gamma_text(double g) { return format_real(g); }

std::vector<FunctionHandle> build_corpus() {
    std::vector<FunctionHandle> out;
    for (double g : {0.5, 1.0, 1.5}) {
        out.push_back({[g](double x) { return std::pow(std::abs(x), g); },
                       "abs_x_pow_" + gamma_text(g),
                       {{"gamma", gamma_text(g)}, {"family", "abs"}},
                       {0.0}});
    }
    for (double g : {0.5, 1.0, 1.5}) {
        out.push_back({[g](double x) { return std::pow(std::abs(x - 0.5), g); },
                       "abs_x_minus_half_pow_" + gamma_text(g),
                       {{"gamma", gamma_text(g)}, {"family", "abs_shifted"}},
                       {0.5}});
    }
    for (double g : {0.5, 1.0}) {
        out.push_back({[g](double x) { return x > 0.0 ? std::pow(x, g) : 0.0; },
                       "trunc_pow_" + gamma_text(g),
                       {{"gamma", gamma_text(g)}, {"family", "truncated_power"}},
                       {0.0}});
    }
    out.push_back({[](double x) { return std::exp(x); },
                   "exp_x",
                   {{"gamma", "analytic"}, {"family", "exp"}},
                   {}});
    // sum_{k=0}^{7} T_k(x) / (k + 1)
    out.push_back({[](double x) {
                       double t0 = 1.0;
                       double t1 = x;
                       double s = t0 + t1 / 2.0;
                       for (int k = 2; k <= 7; ++k) {
                           const double t2 = 2.0 * x * t1 - t0;
                           s += t2 / (k + 1.0);
                           t0 = t1;
                           t1 = t2;
                       }
                       return s;
                   },
                   "poly_deg7",
                   {{"gamma", "analytic"}, {"family", "polynomial"}, {"degree", "7"}},
                   {}});
    return out;
}

}  // namespace

const std::vector<FunctionHandle>& corpus() {
    static const std::vector<FunctionHandle> members = build_corpus();
    return members;
}

const FunctionHandle& corpus_member(std::string_view label) {
    for (const auto& f : corpus()) {
        if (f.label == label) return f;
    }
    throw std::out_of_range("unknown corpus label: " + std::string(label));
}

double nominal_gamma(const FunctionHandle& f) {
    auto it = f.metadata.find("gamma");
    if (it == f.metadata.end() || it->second == "analytic") return std::nan("");
    return std::stod(it->second);
}

}  // namespace wmod
