#ifndef CMMI_EXPERIMENT_HPP
#define CMMI_EXPERIMENT_HPP

/**
 * @file experiment.hpp
 *
 * @brief Experiment configuration, the file formats written by the command-line
 * driver, and the driver commands themselves.
 *
 * Config files are flat `section.key = value` lines; `#` starts a comment.
 *
 *     grid.z = 0 100 1                     # 1D: lo hi step
 *     grid.m = 0 200 1                     # 2D: horizontal axis
 *     grid.n = 0 160 1                     #     vertical axis
 *     class.0.prior = 0.8
 *     class.0.gauss.0 = 1 30 15            # weight mu sigma               (1D)
 *     class.1.gauss.0 = 1 50 50 75 200 50  # weight mu_m mu_n cmm cnn cmn  (2D)
 *     class.2.pmf = x2.csv                 # empirical PMF instead of gaussians
 *     class.2.smooth = true                # replace it by its Gaussian smoother
 *     init.kind = threshold1d              # vertical|horizontal|threshold1d|random|file
 *     init.z_prime = 50
 *     init.n_labels = 3                    # defaults to the class count
 *     init.seed = 7
 *     init.path = start.csv
 *     cm.max_iters = 50
 *     cm.mi_tol = 1e-9
 *     cm.eps = 1e-12
 *     output.dir = out
 *
 * Relative `pmf` and `init.path` entries resolve against the config file's directory.
 */

#include "cmmi/baselines.hpp"
#include "cmmi/cm_classifier.hpp"
#include "cmmi/errors.hpp"
#include "cmmi/generators.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmmi {

/// Configuration error addressed by source line and key.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct InitSpec {
    enum class Kind { vertical, horizontal, threshold1d, random, file };

    Kind kind = Kind::vertical;
    std::size_t n_labels = 0;  ///< 0 means one label per class
    double z_prime = 0;
    std::uint64_t seed = 0;
    std::filesystem::path path;
};

/// A class given either by gaussian components or by a PMF file on the grid.
struct ClassEntry {
    double prior = 0;
    std::vector<MixtureComponent> components;
    std::filesystem::path pmf_path;
    bool smooth = false;
};

struct ExperimentConfig {
    FeatureGrid grid;
    std::vector<ClassEntry> classes;
    InitSpec init;
    CmConfig cm;
    std::filesystem::path out_dir = "out";
};

ExperimentConfig parse_config(std::string_view text, const std::string& source_name = "<config>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

ClassSetup build_setup(const ExperimentConfig& config);
Partition build_init(const ExperimentConfig& config, const ClassSetup& setup);

/// Presets reproducing the two worked examples.
ExperimentConfig example1_config();
ExperimentConfig example2_config(InitSpec::Kind kind, std::uint64_t seed = 1);

// File formats ---------------------------------------------------------------

/// Fixed 9-significant-digit rendering used in every CSV.
std::string format_number(double v);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string trace_csv(const IterationTrace& trace);
std::string partition_csv(const Partition& partition);
Partition parse_partition_csv(std::string_view text, const FeatureGrid& grid, std::size_t n_labels = 0);
std::string compare_csv(const ComparisonReport& report);

/// Binary P6 pixmap, one pixel per cell, top row = highest n.
std::string partition_ppm(const Partition& partition);
void render_partition(const Partition& partition, const std::filesystem::path& path);

/// RGB colour for a label; the palette cycles after three labels.
std::array<std::uint8_t, 3> label_color(Label label);

// Commands -------------------------------------------------------------------

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::size_t> max_iters;
    std::optional<double> mi_tol;
    bool render = false;
};

inline constexpr int exit_converged = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_not_converged = 2;

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
            std::ostream& err);
int cmd_example1(const RunOptions& options, std::ostream& out, std::ostream& err);
/// `init_kind` is vertical, horizontal, random or random:<seed>.
int cmd_example2(std::string_view init_kind, std::optional<std::uint64_t> seed, const RunOptions& options,
                 std::ostream& out, std::ostream& err);
int cmd_compare(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& out,
                std::ostream& err);

} // namespace cmmi

#endif
