#ifndef CMMI_GENERATORS_HPP
#define CMMI_GENERATORS_HPP

#include "cmmi/probability.hpp"

#include <variant>
#include <vector>

namespace cmmi {

/// Normal density on one axis, in grid units.
struct Gaussian1D {
    double mu = 0;
    double sigma = 1;
};

/// Bivariate normal density. `cov_*` are covariance-matrix entries (grid units squared).
struct Gaussian2D {
    double mu_m = 0;
    double mu_n = 0;
    double cov_mm = 1;
    double cov_nn = 1;
    double cov_mn = 0;
};

using GaussianShape = std::variant<Gaussian1D, Gaussian2D>;

struct MixtureComponent {
    double weight = 1;
    GaussianShape shape;
};

/// A true class: its prior and the mixture defining P(Z | x_i).
struct ClassSpec {
    double prior = 1;
    std::vector<MixtureComponent> components;
};

/// Priors P(x_i) and conditionals P(Z | x_i) over a shared grid.
class ClassSetup {
public:
    ClassSetup(FeatureGrid grid, Pmf priors, ConditionalPmf conditionals);

    const FeatureGrid& grid() const { return grid_; }
    const Pmf& priors() const { return priors_; }
    const ConditionalPmf& conditionals() const { return conditionals_; }
    std::size_t classes() const { return priors_.size(); }

    /// P(z) = sum_i P(x_i) P(z | x_i) for every cell.
    const std::vector<double>& cell_mass() const { return cell_mass_; }

private:
    FeatureGrid grid_;
    Pmf priors_;
    ConditionalPmf conditionals_;
    std::vector<double> cell_mass_;
};

/// Throws ValidationError naming the offending quantity.
void validate(const Gaussian1D& g);
void validate(const Gaussian2D& g);
void validate(const ClassSpec& spec);

/// Mixture density evaluated at cell midpoints, renormalized over the grid.
Pmf discretize(const ClassSpec& spec, const FeatureGrid& grid);

/// Builds a setup from class specs; priors must sum to one.
ClassSetup make_setup(const FeatureGrid& grid, const std::vector<ClassSpec>& classes);

/**
 * Moment-matched Gaussian for a PMF on the grid. Within the Gaussian family
 * this maximizes sum_k P(z_k) log P(z_k | theta), so it is the smoother that
 * maximizes the semantic information of the class about Z.
 */
GaussianShape fit_gaussian_smoother(const Pmf& empirical, const FeatureGrid& grid);

/// Two 1D classes on [0, 100], step 1: N(30, 15) and N(70, 10).
ClassSetup example1_setup(double prior0 = 0.8);

/// Three 2D classes on [0, 200] x [0, 160], the third a two-component mixture.
ClassSetup example2_setup();

std::vector<ClassSpec> example1_classes(double prior0 = 0.8);
std::vector<ClassSpec> example2_classes();
FeatureGrid example1_grid();
FeatureGrid example2_grid();

} // namespace cmmi

#endif
