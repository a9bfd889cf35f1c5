#include "cmmi/generators.hpp"

#include "cmmi/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace cmmi {

namespace {

std::size_t dimensionality(const GaussianShape& s) {
    return std::holds_alternative<Gaussian1D>(s) ? 1 : 2;
}

double density(const Gaussian1D& g, double z) {
    const double d = (z - g.mu) / g.sigma;
    return std::exp(-0.5 * d * d) / (g.sigma * std::sqrt(2 * std::numbers::pi));
}

double density(const Gaussian2D& g, double m, double n) {
    const double det = g.cov_mm * g.cov_nn - g.cov_mn * g.cov_mn;
    const double dm = m - g.mu_m;
    const double dn = n - g.mu_n;
    // Quadratic form with the inverse covariance written out.
    const double q = (g.cov_nn * dm * dm - 2 * g.cov_mn * dm * dn + g.cov_mm * dn * dn) / det;
    return std::exp(-0.5 * q) / (2 * std::numbers::pi * std::sqrt(det));
}

} // namespace

void validate(const Gaussian1D& g) {
    if (!std::isfinite(g.mu) || !(g.sigma > 0) || !std::isfinite(g.sigma)) {
        throw ValidationError("Gaussian1D: sigma must be finite and > 0 (got " + std::to_string(g.sigma) + ")");
    }
}

void validate(const Gaussian2D& g) {
    if (!std::isfinite(g.mu_m) || !std::isfinite(g.mu_n)) {
        throw ValidationError("Gaussian2D: mean must be finite");
    }
    if (!(g.cov_mm > 0) || !(g.cov_nn > 0)) {
        throw ValidationError("Gaussian2D: variances must be > 0");
    }
    if (!(g.cov_mm * g.cov_nn - g.cov_mn * g.cov_mn > 0)) {
        throw ValidationError("Gaussian2D: covariance matrix is not positive definite");
    }
}

void validate(const ClassSpec& spec) {
    if (!(spec.prior > 0) || spec.prior > 1) {
        throw ValidationError("ClassSpec: prior must lie in (0, 1]");
    }
    if (spec.components.empty()) {
        throw ValidationError("ClassSpec: at least one component is required");
    }
    double total = 0;
    const auto dims = dimensionality(spec.components.front().shape);
    for (const auto& c : spec.components) {
        if (!(c.weight > 0) || c.weight > 1) {
            throw ValidationError("ClassSpec: component weight must lie in (0, 1]");
        }
        if (dimensionality(c.shape) != dims) {
            throw ValidationError("ClassSpec: components mix 1D and 2D shapes");
        }
        std::visit([](const auto& g) { validate(g); }, c.shape);
        total += c.weight;
    }
    if (std::abs(total - 1.0) > pmf_tolerance) {
        throw ValidationError("ClassSpec: component weights sum to " + std::to_string(total) + ", not 1");
    }
}

Pmf discretize(const ClassSpec& spec, const FeatureGrid& grid) {
    validate(spec);
    if (dimensionality(spec.components.front().shape) != grid.dims()) {
        throw ValidationError("discretize: class dimensionality does not match the grid");
    }
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
        const auto [a, b] = grid.center(cell);
        double v = 0;
        for (const auto& c : spec.components) {
            if (const auto* g1 = std::get_if<Gaussian1D>(&c.shape)) {
                v += c.weight * density(*g1, a);
            } else {
                v += c.weight * density(std::get<Gaussian2D>(c.shape), a, b);
            }
        }
        w[cell] = v;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0)) {
        throw SupportError("discretize: the distribution places no mass on the grid");
    }
    return Pmf::normalized(std::move(w));
}

ClassSetup::ClassSetup(FeatureGrid grid, Pmf priors, ConditionalPmf conditionals)
    : grid_(std::move(grid)), priors_(std::move(priors)), conditionals_(std::move(conditionals)) {
    if (priors_.size() != conditionals_.rows()) {
        throw ValidationError("ClassSetup: prior count does not match conditional count");
    }
    if (conditionals_.cols() != grid_.size()) {
        throw ValidationError("ClassSetup: conditionals are not defined over the grid");
    }
    cell_mass_.assign(grid_.size(), 0.0);
    for (std::size_t i = 0; i < classes(); ++i) {
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            cell_mass_[k] += priors_[i] * conditionals_(i, k);
        }
    }
}

ClassSetup make_setup(const FeatureGrid& grid, const std::vector<ClassSpec>& classes) {
    if (classes.empty()) {
        throw ValidationError("make_setup: no classes");
    }
    std::vector<double> priors;
    std::vector<Pmf> rows;
    for (const auto& c : classes) {
        priors.push_back(c.prior);
        rows.push_back(discretize(c, grid));
    }
    return ClassSetup(grid, Pmf(std::move(priors)), ConditionalPmf(std::move(rows)));
}

GaussianShape fit_gaussian_smoother(const Pmf& empirical, const FeatureGrid& grid) {
    if (empirical.size() != grid.size()) {
        throw ValidationError("fit_gaussian_smoother: PMF is not defined over the grid");
    }
    double mean_a = 0;
    double mean_b = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto [a, b] = grid.center(k);
        mean_a += empirical[k] * a;
        mean_b += empirical[k] * b;
    }
    double var_a = 0;
    double var_b = 0;
    double cov_ab = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto [a, b] = grid.center(k);
        var_a += empirical[k] * (a - mean_a) * (a - mean_a);
        var_b += empirical[k] * (b - mean_b) * (b - mean_b);
        cov_ab += empirical[k] * (a - mean_a) * (b - mean_b);
    }

    if (grid.dims() == 1) {
        if (!(var_a > 0)) {
            throw DegenerateError("fit_gaussian_smoother: sample has zero variance");
        }
        return Gaussian1D{mean_a, std::sqrt(var_a)};
    }
    if (!(var_a > 0) || !(var_b > 0) || !(var_a * var_b - cov_ab * cov_ab > 0)) {
        throw DegenerateError("fit_gaussian_smoother: sample covariance is singular");
    }
    return Gaussian2D{mean_a, mean_b, var_a, var_b, cov_ab};
}

FeatureGrid example1_grid() {
    return FeatureGrid::line(0, 100, 1);
}

FeatureGrid example2_grid() {
    return FeatureGrid::plane(Axis{0, 200, 1}, Axis{0, 160, 1});
}

std::vector<ClassSpec> example1_classes(double prior0) {
    return {
        ClassSpec{prior0, {MixtureComponent{1.0, Gaussian1D{30, 15}}}},
        ClassSpec{1 - prior0, {MixtureComponent{1.0, Gaussian1D{70, 10}}}},
    };
}

std::vector<ClassSpec> example2_classes() {
    return {
        ClassSpec{0.2, {MixtureComponent{1.0, Gaussian2D{50, 50, 75, 200, 50}}}},
        ClassSpec{0.5, {MixtureComponent{1.0, Gaussian2D{75, 90, 200, 75, -50}}}},
        ClassSpec{0.3,
                  {MixtureComponent{2.0 / 3.0, Gaussian2D{100, 50, 125, 125, 75}},
                   MixtureComponent{1.0 / 3.0, Gaussian2D{120, 80, 75, 125, 0}}}},
    };
}

ClassSetup example1_setup(double prior0) {
    return make_setup(example1_grid(), example1_classes(prior0));
}

ClassSetup example2_setup() {
    return make_setup(example2_grid(), example2_classes());
}

} // namespace cmmi
