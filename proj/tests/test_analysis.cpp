#include "doctest.h"
#include "oracles.hpp"
#include "wmod/analysis.hpp"

#include <cmath>
#include <stdexcept>

using namespace wmod;

namespace {

const KernelSpec& kernel() {
    static const KernelSpec k = transcribed_kernel();
    return k;
}

StudyOptions fast() {
    StudyOptions o;
    o.modulus.symmetric = true;
    return o;
}

// a study with E_n = ce n^-le and omega(1/n) = ch n^-lh for n = 2..64
FunctionStudy synthetic(double le, double lh, const WeightParams& w, double ce = 1.0, double ch = 1.0) {
    FunctionStudy s;
    s.f_label = "synthetic";
    s.w = w;
    s.n_values = default_n_values(64);
    s.errors.f_label = s.f_label;
    s.errors.w = w;
    s.errors.n_values = s.n_values;
    for (int n : s.n_values) {
        s.errors.errors.push_back(ce * std::pow(n, -le));
        s.errors.converged.push_back(true);
        s.errors.failures.emplace_back();
        s.omegas.push_back(ch * std::pow(n, -lh));
    }
    return s;
}

const WeightParams kHeadline(kInf, 1.0);

}  // namespace

TEST_CASE("rate estimates recover exact and perturbed power laws") {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> noisy;
    for (int n = 4; n <= 64; ++n) {
        xs.push_back(n);
        ys.push_back(2.5 * std::pow(n, -0.7));
        noisy.push_back(3.0 * std::pow(n, -1.5) * (n % 2 == 0 ? 1.05 : 0.95));
    }
    const RateEstimate a = estimate_rate(xs, ys, RateDirection::decay_in_n);
    CHECK(a.lambda == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(a.constant == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(a.residual <= 1e-12);
    CHECK(a.points == xs.size());
    CHECK(a.x_lo == 4.0);
    CHECK(a.x_hi == doctest::Approx(64.0));

    const RateEstimate b = estimate_rate(xs, noisy, RateDirection::decay_in_n);
    CHECK(std::abs(b.lambda - 1.5) <= 0.03);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(noisy[i] <= b.constant * std::pow(xs[i], -b.lambda) * (1 + 1e-12));

    std::vector<double> ds;
    std::vector<double> om;
    for (double x : xs) {
        ds.push_back(1.0 / x);
        om.push_back(0.4 * std::pow(1.0 / x, 0.5));
    }
    CHECK(estimate_rate(ds, om, RateDirection::growth_in_delta).lambda == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rate estimates reject degenerate input") {
    const std::vector<double> xs{1, 2, 3, 4, 5};
    const std::vector<double> zeros(5, 0.0);
    const std::vector<double> three{1, 0, 0.5, 0, 0.2};
    CHECK_THROWS_AS((void)estimate_rate(xs, zeros, RateDirection::decay_in_n), std::invalid_argument);
    CHECK_THROWS_AS((void)estimate_rate(xs, three, RateDirection::decay_in_n), std::invalid_argument);
    CHECK_THROWS_AS((void)estimate_rate(std::vector<double>{1, 2}, xs, RateDirection::decay_in_n),
                    std::invalid_argument);
    const std::vector<double> bad_x{0, 1, 2, 3, 4};
    CHECK_THROWS_AS((void)estimate_rate(bad_x, xs, RateDirection::decay_in_n), std::invalid_argument);
    const std::vector<double> nan_y{1, 2, std::nan(""), 3, 4};
    CHECK_THROWS_AS((void)estimate_rate(xs, nan_y, RateDirection::decay_in_n), std::invalid_argument);
}

TEST_CASE("fourier-jacobi coefficients: orthogonality and a closed form") {
    // a_0(1) = int (1 - x^2)^2 dx = 16/15
    CHECK(fourier_jacobi_coeff(constant_function(1.0), 0, kernel()) == doctest::Approx(16.0 / 15.0).epsilon(1e-13));
    for (int n = 0; n <= 6; ++n) {
        const FunctionHandle p{[n](double x) { return oracle::jacobi_normalized(2.0, 2.0, n, x); }, "P", {}, {}};
        const std::vector<double> a = fourier_jacobi_coeffs(p, 12 - n, kernel(), 160);
        for (int m = 0; m <= 12 - n; ++m) {
            if (m != n) CHECK(std::abs(a[static_cast<std::size_t>(m)]) <= 1e-10);
        }
        CHECK(a[static_cast<std::size_t>(n)] > 0.0);
    }
    CHECK(fourier_jacobi_coeff(corpus_member("abs_x_pow_1"), 1, kernel()) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("multiplier identity holds for the transcription and fails off by one") {
    const MultiplierReport r = multiplier_check(kernel(), multiplier_members());
    CHECK(r.pass);
    CHECK(r.max_rel_err <= 1e-6);
    CHECK_FALSE(r.rows.empty());
    bool skipped = false;
    for (const auto& row : r.rows) skipped = skipped || row.skipped;
    CHECK(skipped);  // odd coefficients of even members vanish

    KernelSpec off = kernel();
    off.idx_y = JacobiIndex(0.0, 5.0);
    const MultiplierReport bad = multiplier_check(off, multiplier_members());
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_rel_err > 1e-3);
}

TEST_CASE("jackson: constants are degenerate, kinks keep a bounded ratio") {
    const std::vector<int> ns = default_n_values(40);
    const JacksonReport c = verify_jackson(kernel(), constant_function(2.0), kHeadline, ns, fast());
    CHECK(c.pass);
    for (double r : c.ratios) CHECK(std::isnan(r));

    const JacksonReport a = verify_jackson(kernel(), corpus_member("abs_x_pow_1"), kHeadline, ns, fast());
    CHECK(a.pass);
    CHECK(a.max_ratio > 0.0);
    CHECK(a.late_max <= kJacksonGrowth * a.early_max);
    CHECK(a.ratios.size() == ns.size());

    CHECK_THROWS_AS((void)verify_jackson(kernel(), constant_function(1.0), WeightParams(2.0, 0.0), ns, fast()),
                    std::invalid_argument);
}

TEST_CASE("jackson flags a ratio that grows in n") {
    FunctionStudy s = synthetic(0.5, 1.0, kHeadline);
    CHECK_FALSE(verify_jackson(s).pass);
    s = synthetic(1.0, 1.0, kHeadline);
    CHECK(verify_jackson(s).pass);
}

TEST_CASE("inverse and direct checks on synthetic studies") {
    const RateCheck ok = verify_inverse(synthetic(0.8, 0.8, kHeadline));
    CHECK(ok.status == CheckStatus::pass);
    REQUIRE(ok.lambda_E);
    CHECK(ok.lambda_E->lambda == doctest::Approx(0.8));
    CHECK(ok.lambda_E->x_lo == 4.0);

    CHECK(verify_inverse(synthetic(0.8, 0.5, kHeadline)).status == CheckStatus::fail);
    CHECK(verify_direct(synthetic(0.8, 0.5, kHeadline)).status == CheckStatus::pass);
    CHECK(verify_direct(synthetic(0.5, 0.8, kHeadline)).status == CheckStatus::fail);
    CHECK(verify_inverse(synthetic(2.5, 2.5, kHeadline)).status == CheckStatus::out_of_hypothesis);
    CHECK(verify_direct(synthetic(2.5, 2.5, kHeadline)).status == CheckStatus::out_of_hypothesis);
    CHECK(verify_inverse(synthetic(0.8, 0.8, kHeadline, 0.0, 0.0)).status == CheckStatus::degenerate_pass);

    FunctionStudy exact = synthetic(0.8, 0.8, kHeadline);
    exact.errors.errors[20] = 0.0;
    const RateCheck r = verify_inverse(exact);
    CHECK(r.status == CheckStatus::out_of_hypothesis);
    CHECK_FALSE(r.note.empty());

    CHECK_THROWS_AS((void)verify_inverse(synthetic(0.8, 0.8, WeightParams(2.0, 0.5))), std::invalid_argument);
    CHECK(to_string(CheckStatus::degenerate_pass) == "degenerate_pass");
}

TEST_CASE("zero tolerance still yields well-formed reports") {
    const RateCheck c = verify_inverse(synthetic(0.8, 0.79, kHeadline), 0.0);
    CHECK(c.status == CheckStatus::fail);
    CHECK(c.tolerance == 0.0);
    const ClassMembershipReport m = class_membership(synthetic(0.8, 0.8, kHeadline), 0.0);
    CHECK(m.in_hypothesis);
    CHECK(m.tolerance == 0.0);
    REQUIRE(m.lambda_H);
}

TEST_CASE("property: inverse and direct agree with coincidence") {
    for (double le : {0.3, 0.7, 1.2, 1.6}) {
        for (double lh : {0.3, 0.7, 1.2, 1.6}) {
            const FunctionStudy s = synthetic(le, lh, kHeadline);
            const bool inv = verify_inverse(s).status == CheckStatus::pass;
            const bool dir = verify_direct(s).status == CheckStatus::pass;
            const ClassMembershipReport m = class_membership(s);
            CHECK(m.in_hypothesis);
            CHECK(m.coincide == (inv && dir));
        }
    }
}

TEST_CASE("coincidence on real members at the headline weight") {
    const std::vector<FunctionHandle> fns{corpus_member("abs_x_pow_0.5"), corpus_member("trunc_pow_1"),
                                          corpus_member("poly_deg7")};
    const auto reports = verify_coincidence(kernel(), kHeadline, fns, fast());
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].in_hypothesis);
    CHECK(reports[0].coincide);
    CHECK(reports[0].lambda_E->lambda == doctest::Approx(0.5).epsilon(0.1));
    CHECK(reports[1].in_hypothesis);
    CHECK(reports[1].coincide);
    CHECK_FALSE(reports[2].in_hypothesis);
    CHECK_THROWS_AS((void)verify_coincidence(kernel(), WeightParams(kInf, 0.5), fns, fast()), std::invalid_argument);
}

TEST_CASE("verify_all is ordered and deterministic") {
    const std::vector<FunctionHandle> fns{corpus_member("exp_x"), corpus_member("abs_x_minus_half_pow_1.5"),
                                          constant_function(1.0)};
    const std::vector<int> ns = default_n_values(20);
    const auto a = verify_all(kernel(), kHeadline, fns, ns, fast(), 2);
    const auto b = verify_all(kernel(), kHeadline, fns, ns, fast(), 1);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].study.f_label == fns[i].label);
        CHECK(a[i].study.errors.errors == b[i].study.errors.errors);
        CHECK(a[i].study.omegas == b[i].study.omegas);
        CHECK(a[i].jackson.has_value());
        CHECK(a[i].coincidence.has_value());
    }
    CHECK(all_pass(a[2]));
    CHECK(a[2].inverse->status == CheckStatus::degenerate_pass);

    const auto p2 = verify_all(kernel(), WeightParams(1.0, 1.0), fns, ns, fast(), 1);
    CHECK(p2[0].jackson.has_value());
    CHECK_FALSE(p2[0].inverse.has_value());
}
