#ifndef CMMI_CM_CLASSIFIER_HPP
#define CMMI_CM_CLASSIFIER_HPP

/**
 * @file cm_classifier.hpp
 *
 * @brief Channels-matching iteration for maximum mutual information
 * classification of unseen instances.
 *
 * Each iteration derives the Shannon channel P(y_j | x_i) from the current
 * partition of the feature grid, turns it into a semantic channel (the ratio
 * table P(y_j | x_i) / P(y_j)), and relabels every cell with the label whose
 * conditional information I(X; theta_j | z) is largest. The loop stops at a
 * fixed point of the partition.
 */

#include "cmmi/generators.hpp"
#include "cmmi/probability.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace cmmi {

using Label = std::uint32_t;

/// One label per grid cell.
class Partition {
public:
    Partition() = default;
    Partition(FeatureGrid grid, std::vector<Label> labels, std::size_t n_labels);

    const FeatureGrid& grid() const { return grid_; }
    std::size_t n_labels() const { return n_labels_; }
    std::size_t size() const { return labels_.size(); }
    Label operator[](std::size_t cell) const { return labels_[cell]; }
    const std::vector<Label>& labels() const { return labels_; }

    bool operator==(const Partition& other) const {
        return n_labels_ == other.n_labels_ && labels_ == other.labels_ && grid_ == other.grid_;
    }

private:
    FeatureGrid grid_;
    std::vector<Label> labels_;
    std::size_t n_labels_ = 0;
};

/// Stand-in for T(theta_j | x_i) / T(theta_j), indexed `ratio(label, class)`.
struct SemanticChannelTable {
    enum class Construction { exact_ratio, smoothed_ratio };

    std::vector<std::vector<double>> ratios;  ///< [label][class]
    std::vector<bool> active;                 ///< label has positive P(y_j)
    std::vector<double> label_mass;           ///< P(y_j) after smoothing
    Construction construction = Construction::exact_ratio;

    std::size_t labels() const { return ratios.size(); }
    std::size_t classes() const { return ratios.empty() ? 0 : ratios.front().size(); }
    double ratio(std::size_t label, std::size_t cls) const { return ratios[label][cls]; }
};

struct CmConfig {
    std::size_t max_iters = 50;
    double mi_tol = 1e-9;
    double channel_smoothing_eps = 1e-12;
};

struct IterationRecord {
    std::size_t iter = 0;
    double shannon_mi_bits = 0;
    double semantic_mi_bits = 0;
    std::size_t cells_changed = 0;
};

enum class StopReason { fixed_point, cycle, max_iters };

struct IterationTrace {
    std::vector<IterationRecord> records;
    std::vector<Partition> partitions;  ///< partition after each record, same indexing
    bool converged = false;
    StopReason stop_reason = StopReason::max_iters;
    Partition final_partition;
};

/// P(y_j | x_i): the conditional mass of class i in the region labeled j. Rows are classes.
ConditionalPmf shannon_channel(const Partition& partition, const ClassSetup& setup);

/// P(x_i, y_j) induced by the partition.
JointPmf partition_joint(const Partition& partition, const ClassSetup& setup);

/// Shannon mutual information between true class and label for a partition.
double partition_mi(const Partition& partition, const ClassSetup& setup);

/**
 * Semantic channel from a Shannon channel. With eps > 0 each channel entry is
 * smoothed to (P(y_j|x_i) + eps) / (1 + eps * labels), so every label keeps a
 * nonzero ratio; eps = 0 yields the exact ratio and marks empty labels inactive.
 */
SemanticChannelTable matching_one(const ConditionalPmf& channel, const Pmf& priors, double eps);

/// Value used to mark cells with zero density in an information surface.
inline constexpr double undefined_cell = std::numeric_limits<double>::quiet_NaN();

/**
 * I(X; theta_j | z) = sum_i P(x_i | z) log2 r_j(x_i) for every cell. Cells with
 * P(z) = 0 are NaN; a zero ratio under positive posterior gives -infinity.
 */
std::vector<double> info_surface(const SemanticChannelTable& semantic, const ClassSetup& setup, std::size_t label);

/**
 * Relabels each positive-density cell with the active label of largest
 * conditional information; ties go to the lowest label. Zero-density cells keep
 * their label from `previous`, or 0 when no previous partition is given.
 */
Partition matching_two(const SemanticChannelTable& semantic, const ClassSetup& setup,
                       const Partition* previous = nullptr);

IterationTrace run_cm(const ClassSetup& setup, const Partition& init, const CmConfig& config = {});

/// Equal-width bands along the first (m) axis, left to right. The last band takes the remainder.
Partition init_vertical(const FeatureGrid& grid, std::size_t n_labels);
/// Equal-height bands along the second (n) axis, bottom to top.
Partition init_horizontal(const FeatureGrid& grid, std::size_t n_labels);
/// Label 0 below `z_prime`, label 1 at and above it.
Partition init_threshold_1d(const FeatureGrid& grid, double z_prime);
Partition init_random(const FeatureGrid& grid, std::size_t n_labels, std::uint64_t seed);

} // namespace cmmi

#endif
