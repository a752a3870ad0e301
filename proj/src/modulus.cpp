#include "wmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "wmod/numeric.hpp"

namespace wmod {

double shift_deviation(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                       double t, const ModulusOptions& opts) {
    if (t == 0.0) return 0.0;
    const FunctionHandle diff = shift_difference(spec, f, t, opts.shift_nodes);
    return weighted_norm(diff, w, spec.sigma, opts.norm);
}

SymmetryProbe symmetry_probe(const KernelSpec& spec, const WeightParams& w,
                             const ModulusOptions& opts) {
    SymmetryProbe probe;
    for (const char* label : {"abs_x_pow_0.5", "abs_x_minus_half_pow_1", "exp_x"}) {
        const FunctionHandle& f = corpus_member(label);
        for (double t : {0.1, 0.4}) {
            const double plus = shift_deviation(spec, f, w, t, opts);
            const double minus = shift_deviation(spec, f, w, -t, opts);
            const double scale = std::max({plus, minus, 1e-300});
            probe.max_rel_diff = std::max(probe.max_rel_diff, std::abs(plus - minus) / scale);
        }
    }
    probe.symmetric = probe.max_rel_diff <= 1e-6;
    return probe;
}

namespace {

// deviations at rounding level of ||f|| count as exact zeros
constexpr double kExactTol = 1e-12;

void check_delta(double delta) {
    if (!(delta > 0.0) || !(delta <= 3.0)) {
        throw std::invalid_argument("omega requires 0 < delta <= 3");
    }
}

bool resolve_symmetry(const KernelSpec& spec, const WeightParams& w, const ModulusOptions& opts) {
    if (opts.symmetric) return *opts.symmetric;
    return symmetry_probe(spec, w, opts).symmetric;
}

// Deviation at |t|, maximized over the sign of t when the kernel is asymmetric.
class DeviationProfile {
public:
    DeviationProfile(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                     const ModulusOptions& opts, bool symmetric)
        : spec_(spec), f_(f), w_(w), opts_(opts), symmetric_(symmetric),
          exact_(kExactTol * std::max(1.0, weighted_norm(f, w, spec.sigma, opts.norm))) {}

    double operator()(double t) {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        double v = shift_deviation(spec_, f_, w_, t, opts_);
        if (!symmetric_) v = std::max(v, shift_deviation(spec_, f_, w_, -t, opts_));
        if (v <= exact_) v = 0.0;
        cache_.emplace(t, v);
        return v;
    }

private:
    const KernelSpec& spec_;
    const FunctionHandle& f_;
    const WeightParams& w_;
    const ModulusOptions& opts_;
    bool symmetric_;
    double exact_;
    std::map<double, double> cache_;
};

std::vector<double> window_grid(double delta, const ModulusOptions& opts) {
    std::vector<double> ts;
    const int g = opts.geometric_points;
    for (int k = 0; k < g; ++k) {
        const double frac = g == 1 ? 0.0 : static_cast<double>(k) / (g - 1);
        ts.push_back(delta * std::pow(opts.geometric_floor, frac));
    }
    for (int k = 1; k <= opts.uniform_points; ++k) {
        ts.push_back(delta * k / opts.uniform_points);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

// Max over ts[0..last] plus golden refinement when the maximum is interior.
double windowed_sup(DeviationProfile& h, const std::vector<double>& ts,
                    const std::vector<double>& vals, std::size_t last, double delta,
                    double tol) {
    std::size_t best = 0;
    for (std::size_t i = 1; i <= last; ++i) {
        if (vals[i] > vals[best]) best = i;
    }
    double value = vals[best];
    if (best == last && ts[last] == delta) return value;
    const double lo = best == 0 ? 0.0 : ts[best - 1];
    const double hi = best == last ? delta : ts[best + 1];
    value = std::max(value, golden_section_max([&](double t) { return h(t); }, lo, ts[best],
                                               tol * delta));
    value = std::max(value, golden_section_max([&](double t) { return h(t); }, ts[best], hi,
                                               tol * delta));
    return value;
}

}  // namespace

double omega(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w, double delta,
             const ModulusOptions& opts) {
    check_delta(delta);
    DeviationProfile h(spec, f, w, opts, resolve_symmetry(spec, w, opts));
    const std::vector<double> ts = window_grid(delta, opts);
    std::vector<double> vals;
    vals.reserve(ts.size());
    for (double t : ts) vals.push_back(h(t));
    return windowed_sup(h, ts, vals, ts.size() - 1, delta, opts.refine_tol);
}

ModulusCurve modulus_curve(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                           const std::vector<double>& deltas, const ModulusOptions& opts) {
    ModulusCurve curve;
    curve.f_label = f.label;
    curve.w = w;
    curve.deltas = deltas;
    if (deltas.empty()) return curve;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        check_delta(deltas[i]);
        if (i > 0 && !(deltas[i] > deltas[i - 1])) {
            throw std::invalid_argument("modulus_curve requires increasing deltas");
        }
    }
    const bool symmetric = resolve_symmetry(spec, w, opts);
    curve.both_signs = !symmetric;
    DeviationProfile h(spec, f, w, opts, symmetric);

    // Full window grid for the smallest delta, then each increment
    // (delta_{j-1}, delta_j] at the same uniform spacing delta_j / uniform_points.
    std::vector<double> ts = window_grid(deltas.front(), opts);
    std::vector<std::size_t> last_index{ts.size() - 1};
    for (std::size_t j = 1; j < deltas.size(); ++j) {
        const double gap = deltas[j] - deltas[j - 1];
        const int count =
            std::max(1, static_cast<int>(std::ceil(gap * opts.uniform_points / deltas[j] - 1e-12)));
        for (int k = 1; k <= count; ++k) {
            ts.push_back(k == count ? deltas[j] : deltas[j - 1] + gap * k / count);
        }
        last_index.push_back(ts.size() - 1);
    }
    std::vector<double> vals;
    vals.reserve(ts.size());
    for (double t : ts) vals.push_back(h(t));

    double running = 0.0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        const double raw = windowed_sup(h, ts, vals, last_index[j], deltas[j], opts.refine_tol);
        running = std::max(running, raw);
        curve.omegas.push_back(running);
    }
    return curve;
}

void write_csv(std::ostream& out, const ModulusCurve& curve, const std::string& fingerprint) {
    out << "# f_label=" << curve.f_label << "\n";
    out << "# " << describe(curve.w) << "\n";
    out << "# kernel=" << fingerprint << "\n";
    out << "delta,omega\n";
    for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
        out << format_real(curve.deltas[i]) << "," << format_real(curve.omegas[i]) << "\n";
    }
}

}  // namespace wmod
