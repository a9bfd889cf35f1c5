#ifndef CMMI_PROBABILITY_HPP
#define CMMI_PROBABILITY_HPP

/**
 * @file probability.hpp
 *
 * @brief Discrete grids, probability mass functions, Shannon mutual information
 * and the semantic information measures built on truth functions.
 *
 * All information quantities are in bits. The convention 0 log 0 = 0 is used
 * throughout; a positive probability facing a zero model is an error, never a
 * silent -infinity.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cmmi {

/// Tolerance applied when validating that weights sum to one.
inline constexpr double pmf_tolerance = 1e-9;

/**
 * One axis of a feature grid. Cell `k` covers `[lo + k*step, lo + (k+1)*step)`;
 * it is identified by its lower edge and evaluated at its midpoint.
 */
struct Axis {
    double lo = 0;
    double hi = 0;
    double step = 1;

    std::size_t cells() const;
    double lower(std::size_t k) const { return lo + static_cast<double>(k) * step; }
    double center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * step; }

    bool operator==(const Axis&) const = default;
};

/**
 * Discretized feature space with one or two axes. Cells are stored in
 * row-major order over the axes, so in 2D the flat index is `m * extent(1) + n`.
 */
class FeatureGrid {
public:
    FeatureGrid() = default;
    explicit FeatureGrid(std::vector<Axis> axes);

    static FeatureGrid line(double lo, double hi, double step);
    static FeatureGrid plane(Axis m, Axis n);

    std::size_t dims() const { return axes_.size(); }
    std::size_t size() const { return size_; }
    std::size_t extent(std::size_t axis) const { return axes_.at(axis).cells(); }
    const Axis& axis(std::size_t a) const { return axes_.at(a); }

    std::size_t flat(std::size_t m, std::size_t n) const { return m * axes_[1].cells() + n; }
    std::array<std::size_t, 2> indices(std::size_t cell) const;

    /// Midpoint of a cell; the second coordinate is 0 on a 1D grid.
    std::array<double, 2> center(std::size_t cell) const;
    /// Lower corner of a cell; this is the coordinate reported for the cell.
    std::array<double, 2> lower(std::size_t cell) const;

    bool operator==(const FeatureGrid& other) const { return axes_ == other.axes_; }

private:
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
};

/// Probability mass function over `size()` support points.
class Pmf {
public:
    Pmf() = default;

    /// Validates `weights` and renormalizes them if the sum is within tolerance of 1.
    explicit Pmf(std::vector<double> weights);

    /// Normalizes arbitrary nonnegative weights with a positive total.
    static Pmf normalized(std::vector<double> weights);

    static Pmf uniform(std::size_t n);

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const { return weights_; }
    auto begin() const { return weights_.begin(); }
    auto end() const { return weights_.end(); }

    bool operator==(const Pmf&) const = default;

private:
    std::vector<double> weights_;
};

/// One Pmf per condition, all over the same support.
class ConditionalPmf {
public:
    ConditionalPmf() = default;
    explicit ConditionalPmf(std::vector<Pmf> rows);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return rows_.empty() ? 0 : rows_.front().size(); }
    const Pmf& row(std::size_t i) const { return rows_[i]; }
    double operator()(std::size_t i, std::size_t k) const { return rows_[i][k]; }

    bool operator==(const ConditionalPmf&) const = default;

private:
    std::vector<Pmf> rows_;
};

/// Truth values of one label over every class, each in [0, 1].
class TruthFunction {
public:
    TruthFunction() = default;
    explicit TruthFunction(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

/// A truth function together with its logical probability under some prior.
struct LabelTruth {
    TruthFunction truth;
    double logical_probability = 0;
};

/// Joint distribution over (class, label), row-major.
class JointPmf {
public:
    JointPmf() = default;
    JointPmf(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// P(x_i, y_j) = P(x_i) P(y_j | x_i).
    static JointPmf from_channel(const Pmf& prior, const ConditionalPmf& channel);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::vector<double> row_marginal() const;
    std::vector<double> col_marginal() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

double shannon_mi(const JointPmf& joint);

/// T(theta_j) = sum_i P(x_i) T(theta_j | x_i).
double logical_probability(const TruthFunction& t, const Pmf& prior);

LabelTruth make_label_truth(TruthFunction t, const Pmf& prior);

/// P(x_i | theta_j) = T(theta_j | x_i) P(x_i) / T(theta_j).
Pmf likelihood_from_truth(const TruthFunction& t, const Pmf& prior);

/// Inverse direction: the likelihood-to-prior ratio scaled so its maximum is 1.
TruthFunction truth_from_likelihood(const Pmf& likelihood, const Pmf& prior);

/// Empirical distribution of a nonempty count vector.
Pmf empirical(std::span<const std::uint64_t> counts);

/// H(p, q) = -sum_i p_i log2 q_i.
double cross_entropy(const Pmf& p, const Pmf& q);

/// log2 of prod_i model_i^counts_i.
double sample_log_likelihood(std::span<const std::uint64_t> counts, const Pmf& model);

/// log2(t_value / t_logical); negative when the label is a poor fit for the class.
double semantic_info_point(double t_value, double t_logical);

double semantic_info_conditional(const Pmf& sampling, const TruthFunction& t, double t_logical);

/// Semantic mutual information where `ratios[j][i]` stands for T(theta_j|x_i) / T(theta_j).
double semantic_mi_from_ratios(const JointPmf& joint, std::span<const std::vector<double>> ratios);

double semantic_mi(const JointPmf& joint, std::span<const TruthFunction> truths,
                   std::span<const double> logicals);

double semantic_mi(const JointPmf& joint, std::span<const LabelTruth> labels);

/// exp(-(v - mu)^2 / (2 sigma^2)) at each class value.
TruthFunction gaussian_truth(std::span<const double> class_values, double mu, double sigma);

struct GaussianDecomposition {
    double h_theta = 0;          ///< -sum_j P(y_j) log2 T(theta_j)
    double h_theta_given_x = 0;  ///< mean squared deviation term, in bits
    double smi = 0;              ///< h_theta - h_theta_given_x
};

/**
 * Semantic mutual information for Gaussian truth functions split into a
 * regularization term and a squared-error term. `class_values[i]` is the real
 * position of class i; `mus[j]` the centre of label j's truth function.
 */
GaussianDecomposition semantic_mi_gaussian_decomposition(const JointPmf& joint,
                                                         std::span<const double> class_values,
                                                         std::span<const double> mus, double sigma);

} // namespace cmmi

#endif
