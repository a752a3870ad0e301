#include "wmod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "wmod/polybasis.hpp"

namespace wmod {

RateEstimate estimate_rate(std::span<const double> xs, std::span<const double> ys,
                           RateDirection direction) {
    if (xs.size() != ys.size()) throw std::invalid_argument("estimate_rate: length mismatch");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) {
            throw std::invalid_argument("estimate_rate: xs must be positive");
        }
        if (ys[i] < 0.0 || !std::isfinite(ys[i])) {
            throw std::invalid_argument("estimate_rate: ys must be finite and nonnegative");
        }
        if (ys[i] == 0.0) continue;
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    if (lx.size() < 4) throw std::invalid_argument("fewer than 4 nonzero points");

    const double k = static_cast<double>(lx.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("estimate_rate: xs must not all coincide");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    RateEstimate est;
    est.lambda = direction == RateDirection::decay_in_n ? -slope : slope;
    est.points = lx.size();
    est.x_lo = std::exp(*std::min_element(lx.begin(), lx.end()));
    est.x_hi = std::exp(*std::max_element(lx.begin(), lx.end()));
    double top = -kInf;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double dev = ly[i] - (intercept + slope * lx[i]);
        est.residual = std::max(est.residual, std::abs(dev));
        top = std::max(top, ly[i] - slope * lx[i]);
    }
    est.constant = std::exp(top);
    return est;
}

std::vector<double> fourier_jacobi_coeffs(const FunctionHandle& f, int nmax, const KernelSpec& spec,
                                          int per_piece) {
    if (nmax < 0) throw std::invalid_argument("coefficient degree must be nonnegative");
    const QuadratureRule rule = graded_rule(-1.0, 1.0, f.breakpoints, per_piece);
    std::vector<CompensatedSum> sums(static_cast<std::size_t>(nmax) + 1);
    std::vector<double> p(static_cast<std::size_t>(nmax) + 1);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double x = rule.nodes[i];
        const double s = spec.sigma(x);
        const double v = f(x) * s * s * rule.weights[i];
        if (!std::isfinite(v)) throw std::domain_error("non-finite integrand in a_n(f)");
        eval_jacobi_all(spec.idx_x, x, p);
        for (std::size_t n = 0; n < p.size(); ++n) sums[n].add(v * p[n]);
    }
    std::vector<double> out;
    out.reserve(sums.size());
    for (const auto& s : sums) out.push_back(s.value());
    return out;
}

double fourier_jacobi_coeff(const FunctionHandle& f, int n, const KernelSpec& spec) {
    if (n < 0) throw std::invalid_argument("coefficient degree must be nonnegative");
    const FunctionHandle abs_f{[&f](double x) { return std::abs(f(x)); }, f.label, {}, f.breakpoints};
    int m = std::max(32, n + 8);
    double prev = fourier_jacobi_coeffs(f, n, spec, m)[static_cast<std::size_t>(n)];
    for (int k = 0; k < 6; ++k) {
        m *= 2;
        const double cur = fourier_jacobi_coeffs(f, n, spec, m)[static_cast<std::size_t>(n)];
        const double scale = std::max(fourier_jacobi_coeffs(abs_f, 0, spec, m)[0], 1e-300);
        if (std::abs(cur - prev) <= 1e-13 * scale) return cur;
        prev = cur;
    }
    throw ConvergenceError("a_n(f) did not settle under node doubling");
}

std::vector<FunctionHandle> multiplier_members() {
    std::vector<FunctionHandle> out;
    for (const char* label : {"abs_x_pow_0.5", "abs_x_pow_1.5", "abs_x_minus_half_pow_1",
                              "trunc_pow_0.5", "exp_x"}) {
        out.push_back(corpus_member(label));
    }
    return out;
}

MultiplierReport multiplier_check(const KernelSpec& spec, const std::vector<FunctionHandle>& functions,
                                  int nmax, const std::vector<double>& ys, double tolerance) {
    constexpr int kPerPiece = 96;
    constexpr int kShiftNodes = 192;
    MultiplierReport report;
    report.tolerance = tolerance;
    for (const auto& f : functions) {
        const std::vector<double> a = fourier_jacobi_coeffs(f, nmax, spec, kPerPiece);
        double scale = 0.0;
        for (double v : a) scale = std::max(scale, std::abs(v));
        for (double y : ys) {
            const FunctionHandle g = shifted(spec, f, std::acos(y), kShiftNodes);
            const std::vector<double> b = fourier_jacobi_coeffs(g, nmax, spec, kPerPiece);
            for (int n = 0; n <= nmax; ++n) {
                MultiplierRow row;
                row.f_label = f.label;
                row.n = n;
                row.y = y;
                row.coeff = a[static_cast<std::size_t>(n)];
                row.shifted_coeff = b[static_cast<std::size_t>(n)];
                row.multiplier = eval_jacobi(spec.idx_y, n, y);
                row.skipped = std::abs(row.coeff) <= 1e-9 * scale;
                if (!row.skipped) {
                    row.rel_err = std::abs(row.shifted_coeff - row.coeff * row.multiplier) /
                                  std::abs(row.coeff);
                    if (!std::isfinite(row.rel_err)) row.rel_err = kInf;
                    report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
                }
                report.rows.push_back(row);
            }
        }
    }
    report.pass = report.max_rel_err <= tolerance;
    return report;
}

std::vector<int> default_n_values(int n_max) {
    std::vector<int> ns;
    for (int n = 2; n <= n_max; ++n) ns.push_back(n);
    return ns;
}

FunctionStudy study_function(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                             const std::vector<int>& n_values, const StudyOptions& opts) {
    FunctionStudy study;
    study.f_label = f.label;
    study.w = w;
    study.n_values = n_values;
    study.errors = error_sequence(f, n_values, w, spec.sigma, opts.approx);
    std::vector<double> deltas;
    for (auto it = n_values.rbegin(); it != n_values.rend(); ++it) deltas.push_back(1.0 / *it);
    const ModulusCurve curve = modulus_curve(spec, f, w, deltas, opts.modulus);
    study.omegas.assign(curve.omegas.rbegin(), curve.omegas.rend());
    return study;
}

JacksonReport verify_jackson(const FunctionStudy& study) {
    if (!admissible_for(study.w, Theorem::jackson)) {
        throw std::invalid_argument("verify_jackson: " + describe(study.w) +
                                    " is outside the theorem's hypotheses");
    }
    JacksonReport r;
    r.f_label = study.f_label;
    r.w = study.w;
    bool finite = true;
    bool have_late = false;
    for (std::size_t i = 0; i < study.n_values.size(); ++i) {
        const int n = study.n_values[i];
        if (n < 2) continue;
        const double e = study.errors.errors[i];
        const double om = study.omegas[i];
        r.n_values.push_back(n);
        if (om == 0.0) {
            r.ratios.push_back(std::nan(""));
            if (e != 0.0) finite = false;
            continue;
        }
        const double ratio = e / om;
        r.ratios.push_back(ratio);
        if (!std::isfinite(ratio)) {
            finite = false;
            continue;
        }
        r.max_ratio = std::max(r.max_ratio, ratio);
        if (n <= 32) {
            r.early_max = std::max(r.early_max, ratio);
        } else if (n <= 64) {
            r.late_max = std::max(r.late_max, ratio);
            have_late = true;
        }
    }
    r.pass = finite && (!have_late || r.late_max <= kJacksonGrowth * r.early_max);
    return r;
}

JacksonReport verify_jackson(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                             const std::vector<int>& n_values, const StudyOptions& opts) {
    if (!admissible_for(w, Theorem::jackson)) {
        throw std::invalid_argument("verify_jackson: " + describe(w) +
                                    " is outside the theorem's hypotheses");
    }
    return verify_jackson(study_function(spec, f, w, n_values, opts));
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::degenerate_pass: return "degenerate_pass";
        case CheckStatus::out_of_hypothesis: return "out_of_hypothesis";
    }
    return "unknown";
}

namespace {

struct Fits {
    std::optional<RateEstimate> lambda_E;
    std::optional<RateEstimate> lambda_H;
    bool all_zero = false;  // E and omega vanish throughout the window
    std::string note;
};

Fits fit_window(const FunctionStudy& study) {
    std::vector<double> ns;
    std::vector<double> es;
    std::vector<double> ds;
    std::vector<double> oms;
    bool e_zero = false;
    bool e_all_zero = true;
    bool om_all_zero = true;
    for (std::size_t i = 0; i < study.n_values.size(); ++i) {
        const int n = study.n_values[i];
        if (n < kFitLo || n > kFitHi) continue;
        ns.push_back(n);
        es.push_back(study.errors.errors[i]);
        ds.push_back(1.0 / n);
        oms.push_back(study.omegas[i]);
        e_zero = e_zero || es.back() == 0.0;
        e_all_zero = e_all_zero && es.back() == 0.0;
        om_all_zero = om_all_zero && oms.back() == 0.0;
    }
    Fits fits;
    if (ns.empty()) {
        fits.note = "no n in the fit window";
        return fits;
    }
    if (e_all_zero && om_all_zero) {
        fits.all_zero = true;
        fits.note = "E_n and omega vanish on the window";
        return fits;
    }
    try {
        fits.lambda_H = estimate_rate(ds, oms, RateDirection::growth_in_delta);
    } catch (const std::invalid_argument& e) {
        fits.note = std::string("lambda_H: ") + e.what();
    }
    if (e_zero) {
        fits.note = "E_n hits 0 in the window (exact reproduction)";
        return fits;
    }
    try {
        fits.lambda_E = estimate_rate(ns, es, RateDirection::decay_in_n);
    } catch (const std::invalid_argument& e) {
        fits.note = std::string("lambda_E: ") + e.what();
    }
    return fits;
}

bool in_open(double v, double lo, double hi) { return v > lo && v < hi; }

RateCheck rate_check(const FunctionStudy& study, Theorem theorem, double tolerance) {
    if (!admissible_for(study.w, theorem)) {
        throw std::invalid_argument("verify_" + to_string(theorem) + ": " + describe(study.w) +
                                    " is outside the theorem's hypotheses");
    }
    RateCheck c;
    c.f_label = study.f_label;
    c.w = study.w;
    c.theorem = theorem;
    c.tolerance = tolerance;
    const Fits fits = fit_window(study);
    c.lambda_E = fits.lambda_E;
    c.lambda_H = fits.lambda_H;
    c.note = fits.note;
    if (fits.all_zero) {
        c.status = CheckStatus::degenerate_pass;
        return c;
    }
    if (!fits.lambda_E || !fits.lambda_H) {
        c.status = CheckStatus::out_of_hypothesis;
        return c;
    }
    const double le = fits.lambda_E->lambda;
    const double lh = fits.lambda_H->lambda;
    if (theorem == Theorem::inverse) {
        if (!in_open(le, 0.0, 2.0)) {
            c.status = CheckStatus::out_of_hypothesis;
            c.note = "lambda_E outside (0, 2)";
            return c;
        }
        c.status = lh >= le - tolerance ? CheckStatus::pass : CheckStatus::fail;
    } else {
        if (!in_open(lh, 0.0, 2.0)) {
            c.status = CheckStatus::out_of_hypothesis;
            c.note = "lambda_H outside (0, 2)";
            return c;
        }
        c.status = le >= lh - tolerance ? CheckStatus::pass : CheckStatus::fail;
    }
    return c;
}

}  // namespace

RateCheck verify_inverse(const FunctionStudy& study, double tolerance) {
    return rate_check(study, Theorem::inverse, tolerance);
}

RateCheck verify_direct(const FunctionStudy& study, double tolerance) {
    return rate_check(study, Theorem::direct, tolerance);
}

RateCheck verify_inverse(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                         const StudyOptions& opts) {
    if (!admissible_for(w, Theorem::inverse)) {
        throw std::invalid_argument("verify_inverse: " + describe(w) +
                                    " is outside the theorem's hypotheses");
    }
    return verify_inverse(study_function(spec, f, w, default_n_values(kFitHi), opts));
}

RateCheck verify_direct(const KernelSpec& spec, const FunctionHandle& f, const WeightParams& w,
                        const StudyOptions& opts) {
    if (!admissible_for(w, Theorem::direct)) {
        throw std::invalid_argument("verify_direct: " + describe(w) +
                                    " is outside the theorem's hypotheses");
    }
    return verify_direct(study_function(spec, f, w, default_n_values(kFitHi), opts));
}

ClassMembershipReport class_membership(const FunctionStudy& study, double tolerance) {
    if (!admissible_for(study.w, Theorem::coincidence)) {
        throw std::invalid_argument("verify_coincidence: " + describe(study.w) +
                                    " is outside the theorem's hypotheses");
    }
    ClassMembershipReport r;
    r.f_label = study.f_label;
    r.w = study.w;
    r.tolerance = tolerance;
    const Fits fits = fit_window(study);
    r.lambda_E = fits.lambda_E;
    r.lambda_H = fits.lambda_H;
    r.note = fits.note;
    if (!fits.lambda_E || !fits.lambda_H) return r;
    if (!in_open(fits.lambda_E->lambda, 0.2, 1.8)) {
        r.note = "lambda_E outside (0.2, 1.8)";
        return r;
    }
    r.in_hypothesis = true;
    r.coincide = std::abs(fits.lambda_E->lambda - fits.lambda_H->lambda) <= tolerance;
    return r;
}

namespace {

template <class Fn>
auto ordered_parallel(std::size_t count, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
    using T = decltype(fn(std::size_t{}));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<T>> pending(count);
    std::vector<T> out;
    out.reserve(count);
    std::size_t next = 0;
    for (std::size_t done = 0; done < count; ++done) {
        while (next < count && next < done + threads) {
            pending[next] = std::async(std::launch::async, fn, next);
            ++next;
        }
        out.push_back(pending[done].get());
    }
    return out;
}

}  // namespace

std::vector<ClassMembershipReport> verify_coincidence(const KernelSpec& spec, const WeightParams& w,
                                                      const std::vector<FunctionHandle>& functions,
                                                      const StudyOptions& opts, double tolerance) {
    if (!admissible_for(w, Theorem::coincidence)) {
        throw std::invalid_argument("verify_coincidence: " + describe(w) +
                                    " is outside the theorem's hypotheses");
    }
    const std::vector<int> ns = default_n_values(kFitHi);
    return ordered_parallel(functions.size(), 0, [&](std::size_t i) {
        return class_membership(study_function(spec, functions[i], w, ns, opts), tolerance);
    });
}

std::vector<FunctionVerdict> verify_all(const KernelSpec& spec, const WeightParams& w,
                                        const std::vector<FunctionHandle>& functions,
                                        const std::vector<int>& n_values, const StudyOptions& opts,
                                        unsigned threads) {
    return ordered_parallel(functions.size(), threads, [&](std::size_t i) {
        FunctionVerdict v;
        v.study = study_function(spec, functions[i], w, n_values, opts);
        if (admissible_for(w, Theorem::jackson)) v.jackson = verify_jackson(v.study);
        if (admissible_for(w, Theorem::inverse)) v.inverse = verify_inverse(v.study);
        if (admissible_for(w, Theorem::direct)) v.direct = verify_direct(v.study);
        if (admissible_for(w, Theorem::coincidence)) v.coincidence = class_membership(v.study);
        return v;
    });
}

bool all_pass(const FunctionVerdict& v) {
    if (v.jackson && !v.jackson->pass) return false;
    if (v.inverse && v.inverse->status == CheckStatus::fail) return false;
    if (v.direct && v.direct->status == CheckStatus::fail) return false;
    if (v.coincidence && v.coincidence->in_hypothesis && !v.coincidence->coincide) return false;
    return true;
}

}  // namespace wmod
