#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmmi/errors.hpp"
#include "cmmi/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace cmmi;

namespace {

double normal_cdf(double x, double mu, double sigma) {
    return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

ClassSpec single(GaussianShape g) {
    return ClassSpec{1.0, {MixtureComponent{1.0, g}}};
}

struct Moments {
    double mean;
    double sd;
};

// Mean and sd of N(mu, sigma) truncated to [a, b], by Simpson quadrature.
Moments truncated_moments(double mu, double sigma, double a, double b) {
    const int n = 200000;
    const double h = (b - a) / n;
    double m0 = 0, m1 = 0, m2 = 0;
    for (int k = 0; k <= n; ++k) {
        const double x = a + k * h;
        const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
        const double f = std::exp(-0.5 * (x - mu) * (x - mu) / (sigma * sigma));
        m0 += w * f;
        m1 += w * f * x;
        m2 += w * f * x * x;
    }
    const double mean = m1 / m0;
    return {mean, std::sqrt(m2 / m0 - mean * mean)};
}

} // namespace

TEST_CASE("discretize: mode and symmetry") {
    const auto grid = FeatureGrid::line(0, 100, 1);

    SUBCASE("mean on a cell boundary ties the two neighbouring cells") {
        const auto p = discretize(single(Gaussian1D{50, 10}), grid);
        const auto top = std::max_element(p.begin(), p.end()) - p.begin();
        CHECK(top == 49);
        CHECK(p[49] == p[50]);
    }
    SUBCASE("mean at a cell midpoint is the unique mode") {
        const auto p = discretize(single(Gaussian1D{50.5, 10}), grid);
        CHECK(std::max_element(p.begin(), p.end()) - p.begin() == 50);
    }
    SUBCASE("symmetric about the mean") {
        // Cell midpoints 0.5 .. 100.5 are symmetric about 50.5.
        const auto p = discretize(single(Gaussian1D{50.5, 10}), grid);
        for (std::size_t k = 0; k <= 100; ++k) CHECK(std::abs(p[k] - p[100 - k]) < 1e-12);
    }
}

TEST_CASE("discretize: tail mass of Example-1 class x_1") {
    const auto setup = example1_setup();
    double upper = 0;
    for (std::size_t k = 50; k <= 100; ++k) upper += setup.conditionals()(1, k);
    // Cells 50..100 span [50, 101); the grid itself spans [0, 101).
    const double oracle = (normal_cdf(101, 70, 10) - normal_cdf(50, 70, 10)) /
                          (normal_cdf(101, 70, 10) - normal_cdf(0, 70, 10));
    CHECK(upper == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(std::abs(upper - 0.977) < 1e-3);
}

TEST_CASE("discretize: errors") {
    const auto line = FeatureGrid::line(0, 100, 1);
    const auto plane = FeatureGrid::plane(Axis{0, 20, 1}, Axis{0, 20, 1});
    CHECK_THROWS_AS(discretize(single(Gaussian1D{50, 0}), line), ValidationError);
    CHECK_THROWS_AS(discretize(single(Gaussian1D{50, -1}), line), ValidationError);
    CHECK_THROWS_AS(discretize(single(Gaussian2D{10, 10, 1, 1, 2}), plane), ValidationError);
    CHECK_THROWS_AS(discretize(single(Gaussian1D{10, 1}), plane), ValidationError);
    CHECK_THROWS_AS(discretize(single(Gaussian1D{5000, 1}), line), SupportError);

    ClassSpec bad_weights{1.0, {MixtureComponent{0.5, Gaussian1D{30, 5}}, MixtureComponent{0.4, Gaussian1D{60, 5}}}};
    CHECK_THROWS_AS(discretize(bad_weights, line), ValidationError);
    ClassSpec mixed{1.0, {MixtureComponent{0.5, Gaussian1D{30, 5}}, MixtureComponent{0.5, Gaussian2D{}}}};
    CHECK_THROWS_AS(validate(mixed), ValidationError);
}

TEST_CASE("property: discretize yields valid PMFs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mu(10, 90);
    std::uniform_real_distribution<double> sd(1, 30);
    std::uniform_real_distribution<double> w(0.1, 1);
    const auto line = FeatureGrid::line(0, 100, 1);
    const auto plane = FeatureGrid::plane(Axis{0, 100, 2}, Axis{0, 100, 2});
    for (int t = 0; t < 50; ++t) {
        const double a = w(rng);
        const double b = w(rng);
        ClassSpec s1{1.0, {MixtureComponent{a / (a + b), Gaussian1D{mu(rng), sd(rng)}},
                           MixtureComponent{b / (a + b), Gaussian1D{mu(rng), sd(rng)}}}};
        const auto p1 = discretize(s1, line);
        CHECK(std::abs(std::accumulate(p1.begin(), p1.end(), 0.0) - 1) < 1e-9);
        CHECK(std::all_of(p1.begin(), p1.end(), [](double x) { return x >= 0; }));

        const double vm = sd(rng) * sd(rng);
        const double vn = sd(rng) * sd(rng);
        const double rho = std::uniform_real_distribution<double>(-0.9, 0.9)(rng);
        const auto p2 = discretize(single(Gaussian2D{mu(rng), mu(rng), vm, vn, rho * std::sqrt(vm * vn)}), plane);
        CHECK(std::abs(std::accumulate(p2.begin(), p2.end(), 0.0) - 1) < 1e-9);
        CHECK(std::all_of(p2.begin(), p2.end(), [](double x) { return x >= 0; }));
    }
}

TEST_CASE("fit_gaussian_smoother") {
    const auto line = FeatureGrid::line(0, 100, 1);

    SUBCASE("grid-truncated Gaussian matches the truncated-normal moments") {
        const auto g = std::get<Gaussian1D>(fit_gaussian_smoother(discretize(single(Gaussian1D{30, 15}), line), line));
        const auto oracle = truncated_moments(30, 15, 0, 101);
        CHECK(std::abs(g.mu - oracle.mean) < 0.5);
        CHECK(std::abs(g.sigma - oracle.sd) < 0.5);
        // Truncation two sigmas below the mean moves the fit by under one grid step.
        CHECK(std::abs(g.mu - 30) < 1.0);
        CHECK(std::abs(g.sigma - 15) < 1.0);
    }
    SUBCASE("untruncated 1D Gaussian is recovered within half a step") {
        const auto g = std::get<Gaussian1D>(fit_gaussian_smoother(discretize(single(Gaussian1D{50, 8}), line), line));
        CHECK(std::abs(g.mu - 50) < 0.5);
        CHECK(std::abs(g.sigma - 8) < 0.5);
    }
    SUBCASE("untruncated 2D Gaussian is recovered within half a step") {
        const auto plane = FeatureGrid::plane(Axis{0, 200, 1}, Axis{0, 160, 1});
        const Gaussian2D truth{100, 80, 100, 64, 30};
        const auto g = std::get<Gaussian2D>(fit_gaussian_smoother(discretize(single(truth), plane), plane));
        CHECK(std::abs(g.mu_m - truth.mu_m) < 0.5);
        CHECK(std::abs(g.mu_n - truth.mu_n) < 0.5);
        CHECK(std::abs(g.cov_mm - truth.cov_mm) < 0.5);
        CHECK(std::abs(g.cov_nn - truth.cov_nn) < 0.5);
        CHECK(std::abs(g.cov_mn - truth.cov_mn) < 0.5);
    }
    SUBCASE("point mass is degenerate") {
        std::vector<double> w(line.size(), 0.0);
        w[40] = 1;
        CHECK_THROWS_AS(fit_gaussian_smoother(Pmf(w), line), DegenerateError);
    }
    SUBCASE("two separated modes widen into one broad Gaussian") {
        ClassSpec two{1.0, {MixtureComponent{0.5, Gaussian1D{25, 4}}, MixtureComponent{0.5, Gaussian1D{75, 4}}}};
        const auto g = std::get<Gaussian1D>(fit_gaussian_smoother(discretize(two, line), line));
        // Law of total variance: 4^2 + 25^2.
        CHECK(g.sigma > 4);
        CHECK(g.sigma * g.sigma == doctest::Approx(16 + 625).epsilon(0.01));
        CHECK(std::abs(g.mu - 50) < 0.5);
    }
}

TEST_CASE("example1_setup") {
    const auto s = example1_setup();
    CHECK(s.grid().size() == 101);
    CHECK(s.priors()[0] == doctest::Approx(0.8));
    CHECK(s.priors()[1] == doctest::Approx(0.2));
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& row = s.conditionals().row(i);
        CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1) < 1e-9);
    }
    // Mean 30 sits on the boundary between cells 29 and 30.
    const auto& x0 = s.conditionals().row(0);
    CHECK(std::max_element(x0.begin(), x0.end()) - x0.begin() == 29);
    CHECK(x0[29] == x0[30]);
}

TEST_CASE("example2_setup") {
    const auto s = example2_setup();
    CHECK(s.grid().extent(0) == 201);
    CHECK(s.grid().extent(1) == 161);
    CHECK(s.priors()[0] == doctest::Approx(0.2));
    CHECK(s.priors()[1] == doctest::Approx(0.5));
    CHECK(s.priors()[2] == doctest::Approx(0.3));
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& row = s.conditionals().row(i);
        CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1) < 1e-9);
    }
    const auto classes = example2_classes();
    CHECK(classes[2].components.size() == 2);
    CHECK(classes[2].components[0].weight == doctest::Approx(2.0 / 3.0));
    for (const auto& c : classes) {
        for (const auto& comp : c.components) {
            const auto& g = std::get<Gaussian2D>(comp.shape);
            CHECK(g.cov_mm * g.cov_nn - g.cov_mn * g.cov_mn > 0);
        }
    }
    const auto& g0 = std::get<Gaussian2D>(classes[0].components[0].shape);
    CHECK(g0.cov_mm * g0.cov_nn - g0.cov_mn * g0.cov_mn == 12500);
}

TEST_CASE("example setups are deterministic") {
    CHECK(example1_setup().conditionals() == example1_setup().conditionals());
    CHECK(example2_setup().conditionals() == example2_setup().conditionals());
}
