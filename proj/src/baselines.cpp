#include "cmmi/baselines.hpp"

#include "cmmi/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace cmmi {

Partition mpp_classifier(const ClassSetup& setup) {
    const auto& grid = setup.grid();
    std::vector<Label> labels(grid.size(), 0);
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
        if (!(setup.cell_mass()[cell] > 0)) {
            continue;
        }
        double best = -1;
        for (std::size_t i = 0; i < setup.classes(); ++i) {
            // P(x_i | z) shares the denominator P(z), so the joint decides.
            const double joint = setup.priors()[i] * setup.conditionals()(i, cell);
            if (joint > best) {
                best = joint;
                labels[cell] = static_cast<Label>(i);
            }
        }
    }
    return Partition(grid, std::move(labels), setup.classes());
}

double error_rate(const Partition& partition, const ClassSetup& setup) {
    if (partition.n_labels() != setup.classes()) {
        throw ValidationError(fmt::format("error_rate: {} labels but {} classes", partition.n_labels(),
                                          setup.classes()));
    }
    if (!(partition.grid() == setup.grid())) {
        throw ValidationError("error_rate: partition grid does not match the class setup grid");
    }
    double err = 0;
    for (std::size_t cell = 0; cell < partition.size(); ++cell) {
        for (std::size_t i = 0; i < setup.classes(); ++i) {
            if (i != partition[cell]) {
                err += setup.priors()[i] * setup.conditionals()(i, cell);
            }
        }
    }
    return std::clamp(err, 0.0, 1.0);
}

std::vector<Label> visible_classifier(const SemanticChannelTable& semantic) {
    if (std::none_of(semantic.active.begin(), semantic.active.end(), [](bool a) { return a; })) {
        throw ConfigurationError("visible_classifier: no active labels");
    }
    std::vector<Label> out(semantic.classes(), 0);
    for (std::size_t i = 0; i < semantic.classes(); ++i) {
        bool first = true;
        double best = 0;
        for (std::size_t j = 0; j < semantic.labels(); ++j) {
            if (!semantic.active[j]) {
                continue;
            }
            if (first || semantic.ratio(j, i) > best) {
                best = semantic.ratio(j, i);
                out[i] = static_cast<Label>(j);
                first = false;
            }
        }
    }
    return out;
}

double extract_threshold_1d(const Partition& partition) {
    const auto& grid = partition.grid();
    if (grid.dims() != 1) {
        throw ValidationError("extract_threshold_1d requires a 1D partition");
    }
    std::vector<double> crossings;
    for (std::size_t k = 1; k < partition.size(); ++k) {
        if (partition[k] != partition[k - 1]) {
            crossings.push_back(grid.axis(0).lower(k));
        }
    }
    if (crossings.size() != 1) {
        throw MultiBoundaryError(
            fmt::format("extract_threshold_1d: expected one boundary, found {}", crossings.size()),
            std::move(crossings));
    }
    return crossings.front();
}

bool agree_on_support(const Partition& a, const Partition& b, const ClassSetup& setup) {
    for (std::size_t cell = 0; cell < setup.grid().size(); ++cell) {
        if (setup.cell_mass()[cell] > 0 && a[cell] != b[cell]) {
            return false;
        }
    }
    return true;
}

ComparisonReport compare(const ClassSetup& setup, const CmConfig& config, const Partition& init) {
    if (init.n_labels() != setup.classes()) {
        throw ValidationError(
            fmt::format("compare: labels must match classes ({} labels, {} classes)", init.n_labels(), setup.classes()));
    }

    ComparisonReport report;
    report.mmi_trace = run_cm(setup, init, config);
    report.mpp_partition = mpp_classifier(setup);
    const auto& mmi = report.mmi_trace.final_partition;

    report.mmi_partition_mi = partition_mi(mmi, setup);
    report.mpp_partition_mi = partition_mi(report.mpp_partition, setup);
    report.mmi_error_rate = error_rate(mmi, setup);
    report.mpp_error_rate = error_rate(report.mpp_partition, setup);
    report.equivalent = agree_on_support(mmi, report.mpp_partition, setup);

    if (setup.grid().dims() == 1) {
        auto threshold = [](const Partition& p) -> std::optional<double> {
            try {
                return extract_threshold_1d(p);
            } catch (const MultiBoundaryError&) {
                return std::nullopt;
            }
        };
        report.mmi_threshold = threshold(mmi);
        report.mpp_threshold = threshold(report.mpp_partition);
    }

    if (report.mpp_error_rate > report.mmi_error_rate + 1e-12) {
        report.violations.push_back(fmt::format("MPP error rate {:.9g} exceeds MMI error rate {:.9g}",
                                                report.mpp_error_rate, report.mmi_error_rate));
    }
    if (report.mmi_partition_mi < report.mpp_partition_mi - 1e-9) {
        report.violations.push_back(fmt::format("MMI mutual information {:.9g} is below MPP mutual information {:.9g}",
                                                report.mmi_partition_mi, report.mpp_partition_mi));
    }
    return report;
}

} // namespace cmmi
