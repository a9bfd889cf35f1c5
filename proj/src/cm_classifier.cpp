#include "cmmi/cm_classifier.hpp"

#include "cmmi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cmmi {

namespace {

void require_grid(const Partition& partition, const ClassSetup& setup) {
    if (!(partition.grid() == setup.grid())) {
        throw ValidationError("partition grid does not match the class setup grid");
    }
}

/// log2 r_j(x_i) for every label and class; -inf where the ratio is zero.
std::vector<std::vector<double>> log_ratios(const SemanticChannelTable& semantic) {
    std::vector<std::vector<double>> out(semantic.labels());
    for (std::size_t j = 0; j < semantic.labels(); ++j) {
        out[j].resize(semantic.classes());
        for (std::size_t i = 0; i < semantic.classes(); ++i) {
            const double r = semantic.ratio(j, i);
            out[j][i] = r > 0 ? std::log2(r) : -std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

/// Conditional information of one label at one positive-density cell.
double surface_value(const ClassSetup& setup, const std::vector<double>& log_ratio, std::size_t cell) {
    const double pz = setup.cell_mass()[cell];
    double v = 0;
    for (std::size_t i = 0; i < setup.classes(); ++i) {
        const double posterior = setup.priors()[i] * setup.conditionals()(i, cell) / pz;
        if (posterior > 0) {
            v += posterior * log_ratio[i];
        }
    }
    return v;
}

/// Eq.-7 sum that tolerates zero ratios by returning -inf instead of throwing.
double semantic_mi_lenient(const JointPmf& joint, const std::vector<std::vector<double>>& log_ratio) {
    double smi = 0;
    for (std::size_t j = 0; j < joint.cols(); ++j) {
        for (std::size_t i = 0; i < joint.rows(); ++i) {
            if (joint(i, j) > 0) {
                smi += joint(i, j) * log_ratio[j][i];
            }
        }
    }
    return smi;
}

Partition bands(const FeatureGrid& grid, std::size_t n_labels, std::size_t axis) {
    if (grid.dims() != 2) {
        throw ValidationError("band initialisation requires a 2D grid");
    }
    if (n_labels < 2) {
        throw ValidationError("band initialisation requires at least 2 labels");
    }
    const std::size_t extent = grid.extent(axis);
    const std::size_t width = extent / n_labels;
    if (width == 0) {
        throw ValidationError("more labels than cells along the band axis");
    }
    std::vector<Label> labels(grid.size());
    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
        const std::size_t pos = grid.indices(cell)[axis];
        labels[cell] = static_cast<Label>(std::min(pos / width, n_labels - 1));
    }
    return Partition(grid, std::move(labels), n_labels);
}

} // namespace

Partition::Partition(FeatureGrid grid, std::vector<Label> labels, std::size_t n_labels)
    : grid_(std::move(grid)), labels_(std::move(labels)), n_labels_(n_labels) {
    if (n_labels_ == 0) {
        throw ValidationError("Partition: n_labels must be positive");
    }
    if (labels_.size() != grid_.size()) {
        throw ValidationError("Partition: label count " + std::to_string(labels_.size()) +
                              " does not match grid size " + std::to_string(grid_.size()));
    }
    for (auto l : labels_) {
        if (l >= n_labels_) {
            throw ValidationError("Partition: label " + std::to_string(l) + " out of range");
        }
    }
}

ConditionalPmf shannon_channel(const Partition& partition, const ClassSetup& setup) {
    require_grid(partition, setup);
    const auto& cond = setup.conditionals();
    std::vector<Pmf> rows;
    rows.reserve(setup.classes());
    for (std::size_t i = 0; i < setup.classes(); ++i) {
        std::vector<double> row(partition.n_labels(), 0.0);
        for (std::size_t cell = 0; cell < partition.size(); ++cell) {
            row[partition[cell]] += cond(i, cell);
        }
        rows.emplace_back(std::move(row));
    }
    return ConditionalPmf(std::move(rows));
}

JointPmf partition_joint(const Partition& partition, const ClassSetup& setup) {
    return JointPmf::from_channel(setup.priors(), shannon_channel(partition, setup));
}

double partition_mi(const Partition& partition, const ClassSetup& setup) {
    return shannon_mi(partition_joint(partition, setup));
}

SemanticChannelTable matching_one(const ConditionalPmf& channel, const Pmf& priors, double eps) {
    if (channel.rows() != priors.size()) {
        throw ValidationError("matching_one: channel rows do not match the prior");
    }
    if (!(eps >= 0)) {
        throw ValidationError("matching_one: eps must be >= 0");
    }
    const std::size_t n_labels = channel.cols();
    const std::size_t n_classes = channel.rows();
    const double scale = 1.0 + eps * static_cast<double>(n_labels);

    SemanticChannelTable out;
    out.construction = eps > 0 ? SemanticChannelTable::Construction::smoothed_ratio
                               : SemanticChannelTable::Construction::exact_ratio;
    out.ratios.assign(n_labels, std::vector<double>(n_classes, 0.0));
    out.active.assign(n_labels, false);
    out.label_mass.assign(n_labels, 0.0);

    for (std::size_t j = 0; j < n_labels; ++j) {
        double py = 0;
        for (std::size_t i = 0; i < n_classes; ++i) {
            py += priors[i] * (channel(i, j) + eps) / scale;
        }
        out.label_mass[j] = py;
        if (!(py > 0)) {
            continue;
        }
        out.active[j] = true;
        for (std::size_t i = 0; i < n_classes; ++i) {
            out.ratios[j][i] = ((channel(i, j) + eps) / scale) / py;
        }
    }
    return out;
}

std::vector<double> info_surface(const SemanticChannelTable& semantic, const ClassSetup& setup, std::size_t label) {
    if (semantic.classes() != setup.classes()) {
        throw ValidationError("info_surface: semantic table and setup disagree on class count");
    }
    if (label >= semantic.labels() || !semantic.active[label]) {
        throw ConfigurationError("info_surface: label " + std::to_string(label) + " is not active");
    }
    const auto logs = log_ratios(semantic);
    std::vector<double> surface(setup.grid().size(), undefined_cell);
    for (std::size_t cell = 0; cell < surface.size(); ++cell) {
        if (setup.cell_mass()[cell] > 0) {
            surface[cell] = surface_value(setup, logs[label], cell);
        }
    }
    return surface;
}

Partition matching_two(const SemanticChannelTable& semantic, const ClassSetup& setup, const Partition* previous) {
    if (semantic.classes() != setup.classes()) {
        throw ValidationError("matching_two: semantic table and setup disagree on class count");
    }
    if (std::none_of(semantic.active.begin(), semantic.active.end(), [](bool a) { return a; })) {
        throw ConfigurationError("matching_two: no active labels");
    }
    if (previous != nullptr) {
        require_grid(*previous, setup);
    }

    const auto logs = log_ratios(semantic);
    const auto& grid = setup.grid();
    std::vector<Label> labels(grid.size(), 0);

    for (std::size_t cell = 0; cell < grid.size(); ++cell) {
        if (!(setup.cell_mass()[cell] > 0)) {
            labels[cell] = previous != nullptr ? (*previous)[cell] : 0;
            continue;
        }
        // A -inf surface only wins when every active label is -inf; the first
        // active label is kept in that case.
        std::size_t best = semantic.labels();
        double best_value = 0;
        for (std::size_t j = 0; j < semantic.labels(); ++j) {
            if (!semantic.active[j]) {
                continue;
            }
            const double v = surface_value(setup, logs[j], cell);
            if (best == semantic.labels() || v > best_value) {
                best = j;
                best_value = v;
            }
        }
        labels[cell] = static_cast<Label>(best);
    }
    return Partition(grid, std::move(labels), semantic.labels());
}

IterationTrace run_cm(const ClassSetup& setup, const Partition& init, const CmConfig& config) {
    require_grid(init, setup);
    if (config.max_iters < 1) {
        throw ValidationError("run_cm: max_iters must be >= 1");
    }
    if (!(config.mi_tol >= 0)) {
        throw ValidationError("run_cm: mi_tol must be >= 0");
    }

    IterationTrace trace;
    Partition current = init;
    double previous_mi = partition_mi(current, setup);

    for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
        const auto channel = shannon_channel(current, setup);
        const auto semantic = matching_one(channel, setup.priors(), config.channel_smoothing_eps);
        Partition next = matching_two(semantic, setup, &current);

        std::size_t changed = 0;
        for (std::size_t cell = 0; cell < next.size(); ++cell) {
            changed += next[cell] != current[cell];
        }

        const auto joint = partition_joint(next, setup);
        IterationRecord rec;
        rec.iter = iter;
        rec.shannon_mi_bits = shannon_mi(joint);
        rec.semantic_mi_bits = semantic_mi_lenient(joint, log_ratios(semantic));
        rec.cells_changed = changed;
        trace.records.push_back(rec);

        if (changed == 0) {
            trace.partitions.push_back(std::move(next));
            trace.converged = true;
            trace.stop_reason = StopReason::fixed_point;
            break;
        }

        // Floating-point cycling: the MI has stalled and the partition revisits an earlier one.
        const bool stalled = rec.shannon_mi_bits - previous_mi < config.mi_tol;
        const bool revisits =
            next == init || std::any_of(trace.partitions.begin(), trace.partitions.end(),
                                        [&](const Partition& p) { return p == next; });
        trace.partitions.push_back(next);
        current = std::move(next);
        previous_mi = rec.shannon_mi_bits;

        if (stalled && revisits) {
            trace.converged = true;
            trace.stop_reason = StopReason::cycle;
            break;
        }
    }

    trace.final_partition = trace.partitions.back();
    return trace;
}

Partition init_vertical(const FeatureGrid& grid, std::size_t n_labels) {
    return bands(grid, n_labels, 0);
}

Partition init_horizontal(const FeatureGrid& grid, std::size_t n_labels) {
    return bands(grid, n_labels, 1);
}

Partition init_threshold_1d(const FeatureGrid& grid, double z_prime) {
    if (grid.dims() != 1) {
        throw ValidationError("init_threshold_1d requires a 1D grid");
    }
    std::vector<Label> labels(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        labels[k] = grid.axis(0).lower(k) >= z_prime ? 1 : 0;
    }
    return Partition(grid, std::move(labels), 2);
}

Partition init_random(const FeatureGrid& grid, std::size_t n_labels, std::uint64_t seed) {
    if (n_labels < 2) {
        throw ValidationError("init_random requires at least 2 labels");
    }
    // Raw engine output keeps the labels identical across standard libraries.
    std::mt19937_64 rng(seed);
    std::vector<Label> labels(grid.size());
    for (auto& l : labels) {
        l = static_cast<Label>(rng() % n_labels);
    }
    return Partition(grid, std::move(labels), n_labels);
}

} // namespace cmmi
