#include "spdemil/problem.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace spdemil;

namespace {

/// Composite Simpson rule for <f, e_i> with e_i = sqrt(2) sin(i pi x).
double sine_coefficient_of_one(std::size_t i) {
    const int n = 2000;
    const double h = 1.0 / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = k * h;
        const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        s += w * std::numbers::sqrt2 * std::sin(static_cast<double>(i) * std::numbers::pi * x);
    }
    return s * h / 3.0;
}

SpectralField ones(std::size_t n) { return SpectralField(std::vector<double>(n, 1.0)); }

SpectralField random_field(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> c(n);
    for (double& x : c) {
        x = nd(gen);
    }
    return SpectralField(std::move(c));
}

}  // namespace

TEST_CASE("shipped examples carry the stated exponents") {
    const ProblemSpec e1 = make_example(1);
    CHECK(e1.params.gamma == make_rational(7, 8));
    CHECK(e1.params.q_dfm() == make_rational(7, 8));
    CHECK(e1.params.alpha == make_rational(9, 4));
    CHECK(e1.params.delta == make_rational(3, 8));
    CHECK(e1.params.q_ees() == make_rational(1, 2));

    const ProblemSpec e2 = make_example(2);
    CHECK(e2.params.gamma == make_rational(17, 24));
    CHECK(e2.params.q_dfm() == make_rational(17, 24));
    CHECK(e2.params.alpha == make_rational(77, 36));

    const ProblemSpec e3 = make_example(3);
    CHECK(e3.params.beta == make_rational(7, 8));
    CHECK(e3.params.q_dfm() == make_rational(1, 4));
    CHECK(e3.params.q_ees() == make_rational(1, 4));
    const SpectralField xi = e3.initial_value(5);
    for (std::size_t i = 1; i <= 5; ++i) {
        CHECK(xi[i - 1] == doctest::Approx(1.0 / static_cast<double>(i * i)));
    }
    CHECK(make_example(1).initial_value(4) == SpectralField(4));
    for (int id = 1; id <= 3; ++id) {
        const ProblemSpec p = make_example(id);
        CHECK(p.T == 1.0);
        CHECK(p.params.rho_A == 2);
        CHECK(p.params.rho_Q == 3);
        CHECK(p.q_law(2) == doctest::Approx(0.125));
    }
    CHECK_THROWS_AS(make_example(0), std::invalid_argument);
    CHECK_THROWS_AS(make_example(4), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    RegularityParams p = example_config(1).params;
    CHECK_NOTHROW(p.validate());
    RegularityParams bad = p;
    bad.beta = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.gamma = make_rational(1, 4);  // below delta
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.rho_Q = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.delta = make_rational(3, 4);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.alpha = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("drift of the affine examples") {
    const ProblemSpec e1 = make_example(1);
    const SpectralField f = eval_drift(e1, SpectralField(6));
    // oracle: quadrature of the sine coefficients of the constant one
    CHECK(f[0] == doctest::Approx(sine_coefficient_of_one(1)).epsilon(1e-9));
    CHECK(f[0] == doctest::Approx(2.0 * std::numbers::sqrt2 / std::numbers::pi));
    CHECK(f[1] == doctest::Approx(sine_coefficient_of_one(2)).scale(1.0).epsilon(1e-9));
    CHECK(std::abs(f[1]) == 0.0);
    CHECK(f[4] == doctest::Approx(sine_coefficient_of_one(5)).epsilon(1e-9));

    const SpectralField y{0.5, -1.0, 2.0};
    const SpectralField g = eval_drift(e1, y);
    const SpectralField g0 = eval_drift(e1, SpectralField(3));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g[i] == doctest::Approx(g0[i] - y[i]));
    }
}

TEST_CASE("drift of the sine example is bounded") {
    const ProblemSpec e3 = make_example(3);
    CHECK(eval_drift(e3, SpectralField(8)) == SpectralField(8));
    double bound = 0.0;
    for (int i = 1; i <= 100000; ++i) {
        bound += std::pow(static_cast<double>(i), -7.0);
    }
    bound = std::sqrt(bound);
    std::mt19937_64 gen(5);
    for (int t = 0; t < 50; ++t) {
        const SpectralField y = random_field(gen, 32, 10.0);
        const SpectralField f = eval_drift(e3, y);
        CHECK(sobolev_norm(f, e3.a_law, 0.0) <= bound);
        CHECK(f[1] == doctest::Approx(std::pow(2.0, -3.5) * std::sin(std::pow(2.0, 3.5) * y[1])));
    }
}

TEST_CASE("diffusion columns") {
    const ProblemSpec e1 = make_example(1);
    const SpectralField col = eval_diffusion_column(e1, SpectralField::unit(3, 1), 1);
    CHECK(col[0] == doctest::Approx(0.5));
    CHECK(col[1] == doctest::Approx(1.0 / (std::pow(2.0, 4.0 / 3.0) + 1.0)));
    CHECK(eval_diffusion_column(e1, SpectralField(4), 2) == SpectralField(4));
    CHECK_THROWS_AS(eval_diffusion_column(e1, SpectralField(4), 0), std::out_of_range);
    CHECK_THROWS_AS(eval_diffusion_column(e1, SpectralField(4), 5), std::out_of_range);

    const SpectralField y{0.3, -0.2, 0.9, 0.1};
    const SpectralField c3 = eval_diffusion_column(e1, y, 3);
    for (std::size_t i = 1; i <= 4; ++i) {
        CHECK(c3[i - 1] == doctest::Approx(0.9 / (std::pow(double(i), 4.0 / 3.0) + 81.0)));
    }
}

TEST_CASE("diffusion is linear and its derivative ignores the base point") {
    std::mt19937_64 gen(9);
    for (int id = 1; id <= 3; ++id) {
        const ProblemSpec p = make_example(id);
        for (int t = 0; t < 20; ++t) {
            const SpectralField y = random_field(gen, 10);
            const SpectralField z = random_field(gen, 10);
            const SpectralField v = random_field(gen, 10);
            for (std::size_t j = 1; j <= 10; ++j) {
                const SpectralField sum = eval_diffusion_column(p, y + z, j);
                const SpectralField parts =
                    eval_diffusion_column(p, y, j) + eval_diffusion_column(p, z, j);
                for (std::size_t i = 0; i < 10; ++i) {
                    CHECK(sum[i] == doctest::Approx(parts[i]).epsilon(1e-14));
                }
                CHECK(eval_diffusion_derivative(p, y, v, j) == eval_diffusion_derivative(p, z, v, j));
                CHECK(eval_diffusion_derivative(p, y, v, j) == eval_diffusion_column(p, v, j));
            }
            const SpectralField twice = eval_diffusion_column(p, 2.0 * y, 4);
            const SpectralField once = eval_diffusion_column(p, y, 4);
            for (std::size_t i = 0; i < 10; ++i) {
                CHECK(twice[i] == 2.0 * once[i]);
            }
        }
    }
}

TEST_CASE("derivative examples and missing derivative") {
    const ProblemSpec e1 = make_example(1);
    const SpectralField d = eval_diffusion_derivative(e1, SpectralField(3), SpectralField::unit(3, 1), 1);
    CHECK(d[1] == doctest::Approx(1.0 / (std::pow(2.0, 4.0 / 3.0) + 1.0)));
    CHECK(eval_diffusion_derivative(e1, ones(3), SpectralField(3), 2) == SpectralField(3));

    ProblemSpec no_derivative = make_example(1);
    no_derivative.diffusion_derivative = nullptr;
    CHECK_FALSE(no_derivative.has_derivative());
    CHECK_THROWS_AS(eval_diffusion_derivative(no_derivative, ones(3), ones(3), 1), std::logic_error);
}

TEST_CASE("commutativity defect") {
    for (int id = 1; id <= 3; ++id) {
        const ProblemSpec p = make_example(id);
        CHECK(commutativity_defect(p, ones(2), 2, 2) > 0.0);
        CHECK(commutativity_defect(p, ones(8), 8, 4) > 0.0);
        CHECK(commutativity_defect(p, SpectralField(4), 4, 4) == 0.0);
        CHECK(commutativity_defect(p, ones(4), 4, 1) == 0.0);
    }
    CHECK_THROWS(commutativity_defect(make_example(1), ones(4), 2, 3));
}

TEST_CASE("growth bound check") {
    const ProblemSpec e1 = make_example(1);
    const std::vector<SpectralField> zero{SpectralField(8)};
    const GrowthReport r0 = check_growth_bounds(e1, zero, 8, 8);
    CHECK(r0.operator_norms[0] == 0.0);
    CHECK(r0.max_ratio == 0.0);

    std::mt19937_64 gen(21);
    std::vector<SpectralField> samples;
    for (int t = 0; t < 10; ++t) {
        samples.push_back(random_field(gen, 8));
    }
    const GrowthReport base = check_growth_bounds(e1, samples, 8, 8);
    double worst = 0.0;
    for (double c : {1e-3, 1.0, 10.0, 1e3, 1e6}) {
        std::vector<SpectralField> scaled;
        for (const SpectralField& s : samples) {
            scaled.push_back(c * s);
        }
        const GrowthReport r = check_growth_bounds(e1, scaled, 8, 8);
        for (std::size_t k = 0; k < samples.size(); ++k) {
            CHECK(std::isfinite(r.ratios[k]));
            // oracle: the operator norm is homogeneous of degree one
            CHECK(r.operator_norms[k] == doctest::Approx(c * base.operator_norms[k]).epsilon(1e-10));
        }
        worst = std::max(worst, r.max_ratio);
    }
    // ||B(y)|| / ||y||_delta is scale free, so the ratio stays below its large-c limit.
    double limit = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        limit = std::max(limit, base.operator_norms[k] / sobolev_norm(samples[k], e1.a_law, 3.0 / 8.0));
    }
    CHECK(worst <= limit * (1.0 + 1e-9));
    CHECK_THROWS(check_growth_bounds(e1, samples, 4, 8));
}
