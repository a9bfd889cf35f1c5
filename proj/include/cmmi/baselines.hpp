#ifndef CMMI_BASELINES_HPP
#define CMMI_BASELINES_HPP

#include "cmmi/cm_classifier.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cmmi {

/// Maximum posterior probability labelling; labels are identified with classes.
Partition mpp_classifier(const ClassSetup& setup);

/// Probability that a cell's label differs from its true class.
double error_rate(const Partition& partition, const ClassSetup& setup);

/// For a visible instance x_i, the label maximizing r_j(x_i). Ties go to the lowest label.
std::vector<Label> visible_classifier(const SemanticChannelTable& semantic);

/// Lower-edge coordinate of the first cell of the upper label in a two-region 1D partition.
double extract_threshold_1d(const Partition& partition);

struct ComparisonReport {
    double mmi_partition_mi = 0;
    double mpp_partition_mi = 0;
    double mmi_error_rate = 0;
    double mpp_error_rate = 0;
    std::optional<double> mmi_threshold;
    std::optional<double> mpp_threshold;
    /// Both partitions agree on every cell with positive density.
    bool equivalent = false;
    /// Ordering checks that failed; empty when both hold.
    std::vector<std::string> violations;
    IterationTrace mmi_trace;
    Partition mpp_partition;
};

/// True when the partitions agree on every cell where P(z) > 0.
bool agree_on_support(const Partition& a, const Partition& b, const ClassSetup& setup);

ComparisonReport compare(const ClassSetup& setup, const CmConfig& config, const Partition& init);

} // namespace cmmi

#endif
