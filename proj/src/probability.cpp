#include "cmmi/probability.hpp"

#include "cmmi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace cmmi {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                              std::to_string(b) + ")");
    }
}

void check_weights(std::span<const double> w, const char* what) {
    if (w.empty()) {
        throw ValidationError(std::string(what) + ": empty support");
    }
    for (double v : w) {
        if (!std::isfinite(v) || v < 0) {
            throw ValidationError(std::string(what) + ": weights must be finite and nonnegative");
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------
// FeatureGrid
// ---------------------------------------------------------------------------

std::size_t Axis::cells() const {
    // The small slack keeps e.g. (1.0 - 0.0) / 0.1 from flooring to 9.
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

FeatureGrid::FeatureGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 2) {
        throw ValidationError("FeatureGrid: expected 1 or 2 axes, got " + std::to_string(axes_.size()));
    }
    size_ = 1;
    for (const auto& a : axes_) {
        if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || !std::isfinite(a.step)) {
            throw ValidationError("FeatureGrid: axis bounds must be finite");
        }
        if (!(a.step > 0)) {
            throw ValidationError("FeatureGrid: step must be > 0");
        }
        if (!(a.hi > a.lo)) {
            throw ValidationError("FeatureGrid: hi must exceed lo");
        }
        if (a.cells() < 2) {
            throw ValidationError("FeatureGrid: each axis needs at least 2 cells");
        }
        size_ *= a.cells();
    }
}

FeatureGrid FeatureGrid::line(double lo, double hi, double step) {
    return FeatureGrid({Axis{lo, hi, step}});
}

FeatureGrid FeatureGrid::plane(Axis m, Axis n) {
    return FeatureGrid({m, n});
}

std::array<std::size_t, 2> FeatureGrid::indices(std::size_t cell) const {
    if (axes_.size() == 1) {
        return {cell, 0};
    }
    const auto ny = axes_[1].cells();
    return {cell / ny, cell % ny};
}

std::array<double, 2> FeatureGrid::center(std::size_t cell) const {
    const auto [m, n] = indices(cell);
    if (axes_.size() == 1) {
        return {axes_[0].center(m), 0.0};
    }
    return {axes_[0].center(m), axes_[1].center(n)};
}

std::array<double, 2> FeatureGrid::lower(std::size_t cell) const {
    const auto [m, n] = indices(cell);
    if (axes_.size() == 1) {
        return {axes_[0].lower(m), 0.0};
    }
    return {axes_[0].lower(m), axes_[1].lower(n)};
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

Pmf::Pmf(std::vector<double> weights) : weights_(std::move(weights)) {
    check_weights(weights_, "Pmf");
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > pmf_tolerance) {
        throw ValidationError("Pmf: weights sum to " + std::to_string(total) + ", not 1");
    }
    for (auto& w : weights_) {
        w /= total;
    }
}

Pmf Pmf::normalized(std::vector<double> weights) {
    check_weights(weights, "Pmf::normalized");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0)) {
        throw ValidationError("Pmf::normalized: total weight is zero");
    }
    for (auto& w : weights) {
        w /= total;
    }
    return Pmf(std::move(weights));
}

Pmf Pmf::uniform(std::size_t n) {
    if (n == 0) {
        throw ValidationError("Pmf::uniform: empty support");
    }
    return Pmf(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ConditionalPmf::ConditionalPmf(std::vector<Pmf> rows) : rows_(std::move(rows)) {
    for (const auto& r : rows_) {
        require_same_size(r.size(), rows_.front().size(), "ConditionalPmf rows");
    }
}

TruthFunction::TruthFunction(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0 && v <= 1)) {
            throw ValidationError("TruthFunction: values must lie in [0, 1]");
        }
    }
}

JointPmf::JointPmf(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    require_same_size(values_.size(), rows * cols, "JointPmf");
    check_weights(values_, "JointPmf");
    const double total = std::accumulate(values_.begin(), values_.end(), 0.0);
    if (std::abs(total - 1.0) > pmf_tolerance) {
        throw ValidationError("JointPmf: entries sum to " + std::to_string(total) + ", not 1");
    }
}

JointPmf JointPmf::from_channel(const Pmf& prior, const ConditionalPmf& channel) {
    require_same_size(prior.size(), channel.rows(), "JointPmf::from_channel");
    std::vector<double> v(channel.rows() * channel.cols());
    for (std::size_t i = 0; i < channel.rows(); ++i) {
        for (std::size_t j = 0; j < channel.cols(); ++j) {
            v[i * channel.cols() + j] = prior[i] * channel(i, j);
        }
    }
    return JointPmf(channel.rows(), channel.cols(), std::move(v));
}

std::vector<double> JointPmf::row_marginal() const {
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            out[i] += (*this)(i, j);
        }
    }
    return out;
}

std::vector<double> JointPmf::col_marginal() const {
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            out[j] += (*this)(i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shannon quantities
// ---------------------------------------------------------------------------

double shannon_mi(const JointPmf& joint) {
    const auto px = joint.row_marginal();
    const auto py = joint.col_marginal();
    double mi = 0;
    for (std::size_t i = 0; i < joint.rows(); ++i) {
        for (std::size_t j = 0; j < joint.cols(); ++j) {
            const double p = joint(i, j);
            if (p > 0) {
                mi += p * std::log2(p / (px[i] * py[j]));
            }
        }
    }
    // Rounding can leave a product joint at -1e-17.
    return std::max(mi, 0.0);
}

Pmf empirical(std::span<const std::uint64_t> counts) {
    std::vector<double> w(counts.begin(), counts.end());
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0)) {
        throw ValidationError("empirical: total count must be positive");
    }
    return Pmf::normalized(std::move(w));
}

double cross_entropy(const Pmf& p, const Pmf& q) {
    require_same_size(p.size(), q.size(), "cross_entropy");
    double h = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0) {
            if (!(q[i] > 0)) {
                throw DomainError("cross_entropy: model is zero where the sample has mass");
            }
            h -= p[i] * std::log2(q[i]);
        }
    }
    return h;
}

double sample_log_likelihood(std::span<const std::uint64_t> counts, const Pmf& model) {
    require_same_size(counts.size(), model.size(), "sample_log_likelihood");
    std::uint64_t total = 0;
    double ll = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        total += counts[i];
        if (counts[i] > 0) {
            if (!(model[i] > 0)) {
                throw DomainError("sample_log_likelihood: model is zero at an observed class (log-likelihood is -inf)");
            }
            ll += static_cast<double>(counts[i]) * std::log2(model[i]);
        }
    }
    if (total == 0) {
        throw ValidationError("sample_log_likelihood: no observations");
    }
    return ll;
}

// ---------------------------------------------------------------------------
// Truth functions and the third Bayes' theorem
// ---------------------------------------------------------------------------

double logical_probability(const TruthFunction& t, const Pmf& prior) {
    require_same_size(t.size(), prior.size(), "logical_probability");
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        s += prior[i] * t[i];
    }
    return std::min(s, 1.0);
}

LabelTruth make_label_truth(TruthFunction t, const Pmf& prior) {
    const double lp = logical_probability(t, prior);
    return LabelTruth{std::move(t), lp};
}

Pmf likelihood_from_truth(const TruthFunction& t, const Pmf& prior) {
    const double lp = logical_probability(t, prior);
    if (!(lp > 0)) {
        throw DegenerateError("likelihood_from_truth: logical probability is zero");
    }
    std::vector<double> w(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        w[i] = t[i] * prior[i] / lp;
    }
    return Pmf::normalized(std::move(w));
}

TruthFunction truth_from_likelihood(const Pmf& likelihood, const Pmf& prior) {
    require_same_size(likelihood.size(), prior.size(), "truth_from_likelihood");
    std::vector<double> ratio(likelihood.size(), 0.0);
    for (std::size_t i = 0; i < likelihood.size(); ++i) {
        if (likelihood[i] > 0) {
            if (!(prior[i] > 0)) {
                throw DomainError("truth_from_likelihood: prior is zero where the likelihood is positive");
            }
            ratio[i] = likelihood[i] / prior[i];
        }
    }
    const double top = *std::max_element(ratio.begin(), ratio.end());
    for (auto& r : ratio) {
        r = std::min(r / top, 1.0);
    }
    return TruthFunction(std::move(ratio));
}

// ---------------------------------------------------------------------------
// Semantic information
// ---------------------------------------------------------------------------

double semantic_info_point(double t_value, double t_logical) {
    if (!(t_value > 0) || !(t_logical > 0)) {
        throw DomainError("semantic_info_point: arguments must be positive");
    }
    return std::log2(t_value / t_logical);
}

double semantic_info_conditional(const Pmf& sampling, const TruthFunction& t, double t_logical) {
    require_same_size(sampling.size(), t.size(), "semantic_info_conditional");
    if (!(t_logical > 0)) {
        throw DomainError("semantic_info_conditional: logical probability must be positive");
    }
    double info = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (sampling[i] > 0) {
            if (!(t[i] > 0)) {
                throw DomainError("semantic_info_conditional: zero truth value at a sampled class");
            }
            info += sampling[i] * std::log2(t[i] / t_logical);
        }
    }
    return info;
}

double semantic_mi_from_ratios(const JointPmf& joint, std::span<const std::vector<double>> ratios) {
    require_same_size(ratios.size(), joint.cols(), "semantic_mi labels");
    double smi = 0;
    for (std::size_t j = 0; j < joint.cols(); ++j) {
        require_same_size(ratios[j].size(), joint.rows(), "semantic_mi classes");
        for (std::size_t i = 0; i < joint.rows(); ++i) {
            const double p = joint(i, j);
            if (p > 0) {
                if (!(ratios[j][i] > 0)) {
                    throw DomainError("semantic_mi: zero truth value where the joint has mass");
                }
                smi += p * std::log2(ratios[j][i]);
            }
        }
    }
    return smi;
}

double semantic_mi(const JointPmf& joint, std::span<const TruthFunction> truths, std::span<const double> logicals) {
    require_same_size(truths.size(), logicals.size(), "semantic_mi logicals");
    require_same_size(truths.size(), joint.cols(), "semantic_mi labels");
    std::vector<std::vector<double>> ratios(truths.size());
    for (std::size_t j = 0; j < truths.size(); ++j) {
        require_same_size(truths[j].size(), joint.rows(), "semantic_mi classes");
        ratios[j].resize(truths[j].size(), 0.0);
        if (logicals[j] > 0) {
            for (std::size_t i = 0; i < truths[j].size(); ++i) {
                ratios[j][i] = truths[j][i] / logicals[j];
            }
        }
    }
    return semantic_mi_from_ratios(joint, ratios);
}

double semantic_mi(const JointPmf& joint, std::span<const LabelTruth> labels) {
    std::vector<TruthFunction> truths;
    std::vector<double> logicals;
    for (const auto& l : labels) {
        truths.push_back(l.truth);
        logicals.push_back(l.logical_probability);
    }
    return semantic_mi(joint, truths, logicals);
}

TruthFunction gaussian_truth(std::span<const double> class_values, double mu, double sigma) {
    if (!(sigma > 0)) {
        throw DomainError("gaussian_truth: sigma must be > 0");
    }
    std::vector<double> t(class_values.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = class_values[i] - mu;
        t[i] = std::exp(-d * d / (2 * sigma * sigma));
    }
    return TruthFunction(std::move(t));
}

GaussianDecomposition semantic_mi_gaussian_decomposition(const JointPmf& joint, std::span<const double> class_values,
                                                         std::span<const double> mus, double sigma) {
    if (!(sigma > 0)) {
        throw DomainError("semantic_mi_gaussian_decomposition: sigma must be > 0");
    }
    require_same_size(class_values.size(), joint.rows(), "semantic_mi_gaussian_decomposition classes");
    require_same_size(mus.size(), joint.cols(), "semantic_mi_gaussian_decomposition labels");

    const auto px = joint.row_marginal();
    const auto py = joint.col_marginal();
    const double two_var = 2 * sigma * sigma;

    GaussianDecomposition out;
    for (std::size_t j = 0; j < mus.size(); ++j) {
        if (!(py[j] > 0)) {
            continue;
        }
        double logical = 0;
        for (std::size_t i = 0; i < px.size(); ++i) {
            const double d = class_values[i] - mus[j];
            logical += px[i] * std::exp(-d * d / two_var);
        }
        if (!(logical > 0)) {
            throw DomainError("semantic_mi_gaussian_decomposition: logical probability underflows to zero");
        }
        out.h_theta -= py[j] * std::log2(logical);
        for (std::size_t i = 0; i < px.size(); ++i) {
            const double d = class_values[i] - mus[j];
            out.h_theta_given_x += joint(i, j) * d * d / two_var;
        }
    }
    out.h_theta_given_x *= std::numbers::log2e;
    out.smi = out.h_theta - out.h_theta_given_x;
    return out;
}

} // namespace cmmi
