#include "doctest.h"
#include "wmod/shift.hpp"
#include "wmod/space.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

using namespace wmod;

namespace {

const SigmaWeight& sigma() {
    static const SigmaWeight s = transcribed_kernel().sigma;
    return s;
}

}  // namespace

TEST_CASE("weight parameters are validated") {
    CHECK_THROWS_AS(WeightParams(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightParams(2.0, std::nan("")), std::invalid_argument);
    CHECK(WeightParams(kInf, 1.0).is_uniform());
    CHECK_FALSE(WeightParams(2.0, 1.0).is_uniform());
    CHECK(parse_p("inf") == kInf);
    CHECK(parse_p("2.5") == 2.5);
    CHECK_THROWS_AS((void)parse_p("0.9"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_p("two"), std::invalid_argument);
    CHECK(describe(WeightParams(kInf, 1.0)) == "p=inf,alpha=1");
}

TEST_CASE("weighted norms against closed forms") {
    const FunctionHandle one = constant_function(1.0);
    CHECK(weighted_norm(one, WeightParams(2.0, 0.0), sigma()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    CHECK(weighted_norm(one, WeightParams(1.0, 0.0), sigma()) == doctest::Approx(2.0).epsilon(1e-13));

    const FunctionHandle& ax = corpus_member("abs_x_pow_1");
    // max |x| (1 - x^2) at x = 1/sqrt(3)
    CHECK(weighted_norm(ax, WeightParams(kInf, 1.0), sigma()) ==
          doctest::Approx(2.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-12));
    // int |x| (1 - x^2) dx = 1/2
    CHECK(weighted_norm(ax, WeightParams(1.0, 1.0), sigma()) == doctest::Approx(0.5).epsilon(1e-12));
    // (int x^2 (1 - x^2)^2 dx)^(1/2) = (16/105)^(1/2)
    CHECK(weighted_norm(ax, WeightParams(2.0, 1.0), sigma()) ==
          doctest::Approx(std::sqrt(16.0 / 105.0)).epsilon(1e-12));
    // (int |x|^3 dx)^(1/3) = (1/2)^(1/3)
    CHECK(weighted_norm(ax, WeightParams(3.0, 0.0), sigma()) ==
          doctest::Approx(std::cbrt(0.5)).epsilon(1e-12));
    // int sqrt|x| (1 - x^2)^(3/4) dx = B(3/4, 7/4)
    const double b = std::exp(std::lgamma(0.75) + std::lgamma(1.75) - std::lgamma(2.5));
    CHECK(weighted_norm(corpus_member("abs_x_pow_0.5"), WeightParams(1.0, 0.75), sigma()) ==
          doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("sup norm finds interior maxima between samples") {
    const FunctionHandle f{[](double x) { return std::exp(-1e6 * (x - 0.123456) * (x - 0.123456)); },
                           "spike", {}, {}};
    const double v = weighted_norm(f, WeightParams(kInf, 0.0), sigma(), NormResolution{512, 4097, 1e-12});
    CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("admissibility regions") {
    CHECK_FALSE(admissible_for(WeightParams(2.0, 0.0), Theorem::inverse));
    CHECK(admissible_for(WeightParams(2.0, 1.0), Theorem::coincidence));
    CHECK(admissible_for(WeightParams(kInf, 1.0), Theorem::jackson));
    CHECK_FALSE(admissible_for(WeightParams(kInf, 1.5), Theorem::jackson));
    CHECK_FALSE(admissible_for(WeightParams(kInf, 0.99), Theorem::direct));
    // p = 1: the Jackson region includes alpha = 1, the others do not
    CHECK(admissible_for(WeightParams(1.0, 1.0), Theorem::jackson));
    CHECK_FALSE(admissible_for(WeightParams(1.0, 1.0), Theorem::inverse));
    CHECK(admissible_for(WeightParams(1.0, 0.75), Theorem::inverse));
    CHECK_FALSE(admissible_for(WeightParams(1.0, 0.5), Theorem::jackson));
    // open bounds 1 - 1/(2p) < alpha < 3/2 - 1/(2p)
    CHECK_FALSE(admissible_for(WeightParams(2.0, 0.75), Theorem::direct));
    CHECK_FALSE(admissible_for(WeightParams(2.0, 1.25), Theorem::direct));
    CHECK(admissible_for(WeightParams(2.0, 1.2499), Theorem::direct));
}

TEST_CASE("corpus is labelled and breakpoints are declared") {
    std::set<std::string> labels;
    for (const auto& f : corpus()) {
        labels.insert(f.label);
        CHECK(f.metadata.contains("gamma"));
        for (double b : f.breakpoints) CHECK(std::abs(b) < 1.0);
        for (int k = 0; k <= 40; ++k) CHECK(std::isfinite(f(-1.0 + 0.05 * k)));
    }
    CHECK(labels.size() == corpus().size());
    CHECK(labels.contains("abs_x_pow_0.5"));
    CHECK(corpus_member("abs_x_minus_half_pow_1.5").breakpoints == std::vector<double>{0.5});
    CHECK(nominal_gamma(corpus_member("trunc_pow_0.5")) == 0.5);
    CHECK(std::isnan(nominal_gamma(corpus_member("exp_x"))));
    CHECK_THROWS_AS((void)corpus_member("nope"), std::out_of_range);
}

TEST_CASE("property: norms are homogeneous and subadditive") {
    const WeightParams weights[] = {WeightParams(kInf, 1.0), WeightParams(2.0, 1.0), WeightParams(1.0, 0.75)};
    for (const auto& w : weights) {
        for (const auto& f : corpus()) {
            const double nf = weighted_norm(f, w, sigma());
            CHECK(weighted_norm(scaled(-2.5, f), w, sigma()) == doctest::Approx(2.5 * nf).epsilon(1e-10));
            for (const auto& g : corpus()) {
                const double sum = weighted_norm(linear_combination(1.0, f, 1.0, g), w, sigma());
                CHECK(sum <= (nf + weighted_norm(g, w, sigma())) * (1.0 + 1e-10));
            }
        }
    }
}
