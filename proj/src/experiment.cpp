#include "cmmi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace cmmi {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) {
            ++i;
        }
        const auto start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return value;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

class ConfigReader {
public:
    ConfigReader(std::string_view text, std::string source) : source_(std::move(source)) {
        std::size_t line_no = 0;
        for (auto raw : split(text, '\n')) {
            ++line_no;
            auto line = raw;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError(fmt::format("{}:{}: expected 'section.key = value'", source_, line_no));
            }
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (key.find('.') == std::string::npos) {
                throw ConfigError(fmt::format("{}:{}: {}: key must have the form section.key", source_, line_no, key));
            }
            if (value.empty()) {
                throw ConfigError(fmt::format("{}:{}: {}: missing value", source_, line_no, key));
            }
            if (!entries_.emplace(key, Entry{value, line_no}).second) {
                throw ConfigError(fmt::format("{}:{}: {}: duplicate key (first set on line {})", source_, line_no, key,
                                              entries_.at(key).line));
            }
        }
    }

    const std::map<std::string, Entry>& entries() const { return entries_; }

    const Entry* find(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const auto* e = find(key);
        if (e != nullptr) {
            throw ConfigError(fmt::format("{}:{}: {}: {}", source_, e->line, key, message));
        }
        throw ConfigError(fmt::format("{}: {}: {}", source_, key, message));
    }

    std::vector<double> reals(const std::string& key, std::size_t min_count, std::size_t max_count) const {
        const auto* e = find(key);
        std::vector<double> out;
        for (auto w : words(e->value)) {
            const auto v = parse_number<double>(w);
            if (!v) {
                fail(key, fmt::format("'{}' is not a number", w));
            }
            out.push_back(*v);
        }
        if (out.size() < min_count || out.size() > max_count) {
            fail(key, min_count == max_count ? fmt::format("expected {} numbers, got {}", min_count, out.size())
                                             : fmt::format("expected {} to {} numbers, got {}", min_count, max_count,
                                                           out.size()));
        }
        return out;
    }

    double real(const std::string& key) const { return reals(key, 1, 1).front(); }

    template <typename T>
    T integer(const std::string& key) const {
        const auto v = parse_number<T>(find(key)->value);
        if (!v) {
            fail(key, "expected a nonnegative integer");
        }
        return *v;
    }

private:
    std::string source_;
    std::map<std::string, Entry> entries_;
};

Axis parse_axis(const ConfigReader& reader, const std::string& key) {
    const auto v = reader.reals(key, 3, 3);
    return Axis{v[0], v[1], v[2]};
}

std::optional<std::size_t> parse_index(std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::nullopt;
    }
    return parse_number<std::size_t>(s);
}

InitSpec::Kind parse_init_kind(const ConfigReader& reader, const std::string& key) {
    const auto& v = reader.find(key)->value;
    if (v == "vertical") return InitSpec::Kind::vertical;
    if (v == "horizontal") return InitSpec::Kind::horizontal;
    if (v == "threshold1d") return InitSpec::Kind::threshold1d;
    if (v == "random") return InitSpec::Kind::random;
    if (v == "file") return InitSpec::Kind::file;
    reader.fail(key, fmt::format("unknown init kind '{}' (vertical|horizontal|threshold1d|random|file)", v));
}

bool parse_bool(const ConfigReader& reader, const std::string& key) {
    const auto& v = reader.find(key)->value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    reader.fail(key, "expected true or false");
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot read '{}'", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Rows of a headed CSV whose last column is a value and the rest are cell indices.
struct CellTable {
    std::vector<std::vector<std::size_t>> indices;
    std::vector<std::string> values;
};

CellTable read_cell_table(std::string_view text, const FeatureGrid& grid, std::string_view value_column) {
    const std::string expected = grid.dims() == 1 ? fmt::format("z_index,{}", value_column)
                                                  : fmt::format("m_index,n_index,{}", value_column);
    CellTable table;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != expected) {
                throw ValidationError(fmt::format("line {}: expected header '{}'", line_no, expected));
            }
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != grid.dims() + 1) {
            throw ValidationError(fmt::format("line {}: expected {} fields", line_no, grid.dims() + 1));
        }
        std::vector<std::size_t> idx;
        for (std::size_t d = 0; d < grid.dims(); ++d) {
            const auto v = parse_index(trim(fields[d]));
            if (!v || *v >= grid.extent(d)) {
                throw ValidationError(fmt::format("line {}: cell index out of range", line_no));
            }
            idx.push_back(*v);
        }
        table.indices.push_back(std::move(idx));
        table.values.emplace_back(trim(fields.back()));
    }
    if (!header_seen) {
        throw ValidationError(fmt::format("missing header '{}'", expected));
    }
    return table;
}

std::size_t flat_index(const FeatureGrid& grid, const std::vector<std::size_t>& idx) {
    return grid.dims() == 1 ? idx[0] : grid.flat(idx[0], idx[1]);
}

Pmf read_pmf_csv(const fs::path& path, const FeatureGrid& grid) {
    const auto table = read_cell_table(read_text(path), grid, "weight");
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t r = 0; r < table.values.size(); ++r) {
        const auto v = parse_number<double>(table.values[r]);
        if (!v) {
            throw ValidationError(fmt::format("{}: bad weight '{}'", path.string(), table.values[r]));
        }
        w[flat_index(grid, table.indices[r])] += *v;
    }
    return Pmf::normalized(std::move(w));
}

fs::path resolve(const fs::path& base, const std::string& value) {
    fs::path p(value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

void set_class_field(const ConfigReader& reader, const std::string& key, std::vector<std::string_view> parts,
                     std::map<std::size_t, ClassEntry>& classes, const fs::path& base_dir, std::size_t dims) {
    // parts: "class", index, field[, component]
    const auto idx = parse_index(parts.size() > 1 ? parts[1] : std::string_view{});
    if (!idx) {
        reader.fail(key, "class index must be a nonnegative integer");
    }
    auto& entry = classes[*idx];
    const auto field = parts.size() > 2 ? parts[2] : std::string_view{};

    if (field == "prior" && parts.size() == 3) {
        entry.prior = reader.real(key);
        if (!(entry.prior > 0) || entry.prior > 1) {
            reader.fail(key, "prior must lie in (0, 1]");
        }
    } else if (field == "gauss" && parts.size() == 4 && parse_index(parts[3])) {
        const std::size_t count = dims == 1 ? 3 : 6;
        const auto v = reader.reals(key, count, count);
        MixtureComponent c;
        c.weight = v[0];
        if (dims == 1) {
            c.shape = Gaussian1D{v[1], v[2]};
        } else {
            c.shape = Gaussian2D{v[1], v[2], v[3], v[4], v[5]};
        }
        if (!(c.weight > 0) || c.weight > 1) {
            reader.fail(key, "component weight must lie in (0, 1]");
        }
        try {
            std::visit([](const auto& g) { validate(g); }, c.shape);
        } catch (const ValidationError& e) {
            reader.fail(key, e.what());
        }
        const auto comp = *parse_index(parts[3]);
        if (entry.components.size() <= comp) {
            entry.components.resize(comp + 1, MixtureComponent{0, Gaussian1D{}});
        }
        entry.components[comp] = c;
    } else if (field == "pmf" && parts.size() == 3) {
        entry.pmf_path = resolve(base_dir, reader.find(key)->value);
    } else if (field == "smooth" && parts.size() == 3) {
        entry.smooth = parse_bool(reader, key);
    } else {
        reader.fail(key, "unknown key");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(std::string_view text, const std::string& source_name, const fs::path& base_dir) {
    const ConfigReader reader(text, source_name);
    ExperimentConfig cfg;

    // Grid first: class components are parsed against its dimensionality.
    const bool has_z = reader.find("grid.z") != nullptr;
    const bool has_m = reader.find("grid.m") != nullptr;
    const bool has_n = reader.find("grid.n") != nullptr;
    try {
        if (has_z && !has_m && !has_n) {
            cfg.grid = FeatureGrid({parse_axis(reader, "grid.z")});
        } else if (!has_z && has_m && has_n) {
            cfg.grid = FeatureGrid({parse_axis(reader, "grid.m"), parse_axis(reader, "grid.n")});
        } else {
            reader.fail("grid", "give either grid.z (1D) or both grid.m and grid.n (2D)");
        }
    } catch (const ValidationError& e) {
        reader.fail(has_z ? "grid.z" : "grid.m", e.what());
    }

    std::map<std::size_t, ClassEntry> classes;
    std::set<std::string> init_keys;
    for (const auto& [key, entry] : reader.entries()) {
        const auto parts = split(key, '.');
        const auto section = parts.front();
        if (section == "grid") {
            if (key != "grid.z" && key != "grid.m" && key != "grid.n") {
                reader.fail(key, "unknown key");
            }
        } else if (section == "class") {
            set_class_field(reader, key, parts, classes, base_dir, cfg.grid.dims());
        } else if (key == "init.kind") {
            cfg.init.kind = parse_init_kind(reader, key);
        } else if (key == "init.n_labels") {
            cfg.init.n_labels = reader.integer<std::size_t>(key);
        } else if (key == "init.z_prime") {
            cfg.init.z_prime = reader.real(key);
        } else if (key == "init.seed") {
            cfg.init.seed = reader.integer<std::uint64_t>(key);
        } else if (key == "init.path") {
            cfg.init.path = resolve(base_dir, entry.value);
        } else if (key == "cm.max_iters") {
            cfg.cm.max_iters = reader.integer<std::size_t>(key);
            if (cfg.cm.max_iters < 1) {
                reader.fail(key, "must be >= 1");
            }
        } else if (key == "cm.mi_tol") {
            cfg.cm.mi_tol = reader.real(key);
            if (!(cfg.cm.mi_tol >= 0)) {
                reader.fail(key, "must be >= 0");
            }
        } else if (key == "cm.eps") {
            cfg.cm.channel_smoothing_eps = reader.real(key);
            if (!(cfg.cm.channel_smoothing_eps >= 0)) {
                reader.fail(key, "must be >= 0");
            }
        } else if (key == "output.dir") {
            cfg.out_dir = entry.value;
        } else {
            reader.fail(key, "unknown key");
        }
    }

    if (classes.empty()) {
        reader.fail("class", "no classes defined");
    }
    std::size_t expected = 0;
    double prior_total = 0;
    for (auto& [idx, entry] : classes) {
        const auto prefix = fmt::format("class.{}", idx);
        if (idx != expected++) {
            reader.fail(prefix, fmt::format("class indices must be contiguous from 0 (missing class.{})", expected - 1));
        }
        if (reader.find(prefix + ".prior") == nullptr) {
            reader.fail(prefix + ".prior", "missing");
        }
        const bool has_pmf = !entry.pmf_path.empty();
        if (has_pmf == !entry.components.empty()) {
            reader.fail(prefix + ".prior", "give either gauss components or a pmf file");
        }
        if (entry.smooth && !has_pmf) {
            reader.fail(prefix + ".smooth", "smoothing applies only to pmf classes");
        }
        double weight_total = 0;
        for (std::size_t c = 0; c < entry.components.size(); ++c) {
            if (!(entry.components[c].weight > 0)) {
                reader.fail(fmt::format("{}.gauss.{}", prefix, c), "missing component");
            }
            weight_total += entry.components[c].weight;
        }
        if (!entry.components.empty() && std::abs(weight_total - 1.0) > pmf_tolerance) {
            reader.fail(prefix + ".gauss.0", fmt::format("component weights sum to {:.12g}, not 1", weight_total));
        }
        prior_total += entry.prior;
        cfg.classes.push_back(std::move(entry));
    }
    if (std::abs(prior_total - 1.0) > pmf_tolerance) {
        reader.fail("class.0.prior", fmt::format("class priors sum to {:.12g}, not 1", prior_total));
    }

    const bool two_d = cfg.grid.dims() == 2;
    const auto kind = cfg.init.kind;
    if ((kind == InitSpec::Kind::vertical || kind == InitSpec::Kind::horizontal) && !two_d) {
        reader.fail("init.kind", "vertical/horizontal initialisation needs a 2D grid");
    }
    if (kind == InitSpec::Kind::threshold1d) {
        if (two_d) {
            reader.fail("init.kind", "threshold1d initialisation needs a 1D grid");
        }
        if (reader.find("init.z_prime") == nullptr) {
            reader.fail("init.z_prime", "missing (required by threshold1d)");
        }
    }
    if (kind == InitSpec::Kind::file && cfg.init.path.empty()) {
        reader.fail("init.path", "missing (required by init.kind = file)");
    }
    if (reader.find("init.n_labels") != nullptr && cfg.init.n_labels < 1) {
        reader.fail("init.n_labels", "must be >= 1");
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    return parse_config(read_text(path), path.string(), path.parent_path());
}

ClassSetup build_setup(const ExperimentConfig& config) {
    std::vector<double> priors;
    std::vector<Pmf> rows;
    for (std::size_t i = 0; i < config.classes.size(); ++i) {
        const auto& entry = config.classes[i];
        try {
            priors.push_back(entry.prior);
            if (entry.pmf_path.empty()) {
                rows.push_back(discretize(ClassSpec{entry.prior, entry.components}, config.grid));
                continue;
            }
            auto pmf = read_pmf_csv(entry.pmf_path, config.grid);
            if (entry.smooth) {
                const auto shape = fit_gaussian_smoother(pmf, config.grid);
                pmf = discretize(ClassSpec{entry.prior, {MixtureComponent{1.0, shape}}}, config.grid);
            }
            rows.push_back(std::move(pmf));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(fmt::format("class.{}: {}", i, e.what()));
        }
    }
    return ClassSetup(config.grid, Pmf(std::move(priors)), ConditionalPmf(std::move(rows)));
}

Partition build_init(const ExperimentConfig& config, const ClassSetup& setup) {
    const auto& init = config.init;
    const std::size_t n_labels = init.n_labels > 0 ? init.n_labels : setup.classes();
    try {
        switch (init.kind) {
        case InitSpec::Kind::vertical:
            return init_vertical(setup.grid(), n_labels);
        case InitSpec::Kind::horizontal:
            return init_horizontal(setup.grid(), n_labels);
        case InitSpec::Kind::threshold1d:
            return init_threshold_1d(setup.grid(), init.z_prime);
        case InitSpec::Kind::random:
            return init_random(setup.grid(), n_labels, init.seed);
        case InitSpec::Kind::file:
            return parse_partition_csv(read_text(init.path), setup.grid(), init.n_labels);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(fmt::format("init: {}", e.what()));
    }
    throw ConfigError("init: unknown kind");
}

ExperimentConfig example1_config() {
    ExperimentConfig cfg;
    cfg.grid = example1_grid();
    for (const auto& c : example1_classes()) {
        cfg.classes.push_back(ClassEntry{c.prior, c.components, {}, false});
    }
    cfg.init.kind = InitSpec::Kind::threshold1d;
    cfg.init.z_prime = 50;
    cfg.out_dir = "out/example1";
    return cfg;
}

ExperimentConfig example2_config(InitSpec::Kind kind, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.grid = example2_grid();
    for (const auto& c : example2_classes()) {
        cfg.classes.push_back(ClassEntry{c.prior, c.components, {}, false});
    }
    cfg.init.kind = kind;
    cfg.init.seed = seed;
    cfg.init.n_labels = 3;
    cfg.out_dir = "out/example2";
    return cfg;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

std::string format_number(double v) {
    return fmt::format("{:.9g}", v);
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(fmt::format("cannot write '{}'", tmp.string()));
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw Error(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    fs::rename(tmp, path);
}

std::string trace_csv(const IterationTrace& trace) {
    std::string out = "iter,shannon_mi_bits,semantic_mi_bits,cells_changed\n";
    for (const auto& r : trace.records) {
        out += fmt::format("{},{},{},{}\n", r.iter, format_number(r.shannon_mi_bits), format_number(r.semantic_mi_bits),
                           r.cells_changed);
    }
    return out;
}

std::string partition_csv(const Partition& partition) {
    const auto& grid = partition.grid();
    std::string out = grid.dims() == 1 ? "z_index,label\n" : "m_index,n_index,label\n";
    for (std::size_t cell = 0; cell < partition.size(); ++cell) {
        const auto [m, n] = grid.indices(cell);
        if (grid.dims() == 1) {
            out += fmt::format("{},{}\n", m, partition[cell]);
        } else {
            out += fmt::format("{},{},{}\n", m, n, partition[cell]);
        }
    }
    return out;
}

Partition parse_partition_csv(std::string_view text, const FeatureGrid& grid, std::size_t n_labels) {
    const auto table = read_cell_table(text, grid, "label");
    std::vector<Label> labels(grid.size(), 0);
    std::vector<bool> seen(grid.size(), false);
    Label max_label = 0;
    for (std::size_t r = 0; r < table.values.size(); ++r) {
        const auto cell = flat_index(grid, table.indices[r]);
        if (seen[cell]) {
            throw ValidationError(fmt::format("partition: cell {} listed twice", cell));
        }
        const auto label = parse_number<Label>(table.values[r]);
        if (!label) {
            throw ValidationError(fmt::format("partition: bad label '{}'", table.values[r]));
        }
        seen[cell] = true;
        labels[cell] = *label;
        max_label = std::max(max_label, *label);
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw ValidationError("partition: not every grid cell is labelled");
    }
    return Partition(grid, std::move(labels), n_labels > 0 ? n_labels : static_cast<std::size_t>(max_label) + 1);
}

std::string compare_csv(const ComparisonReport& report) {
    const auto threshold = [](const std::optional<double>& t) { return t ? format_number(*t) : std::string(); };
    const char* equivalence = report.equivalent ? "equivalent" : "different";
    std::string out = "classifier,mi_bits,error_rate,threshold,equivalence\n";
    out += fmt::format("mmi,{},{},{},{}\n", format_number(report.mmi_partition_mi), format_number(report.mmi_error_rate),
                       threshold(report.mmi_threshold), equivalence);
    out += fmt::format("mpp,{},{},{},{}\n", format_number(report.mpp_partition_mi), format_number(report.mpp_error_rate),
                       threshold(report.mpp_threshold), equivalence);
    return out;
}

std::array<std::uint8_t, 3> label_color(Label label) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 3> palette{{
        {230, 60, 60},
        {60, 180, 75},
        {60, 100, 220},
    }};
    return palette[label % palette.size()];
}

std::string partition_ppm(const Partition& partition) {
    const auto& grid = partition.grid();
    if (grid.dims() != 2) {
        throw UnsupportedDimensionError("render_partition: only 2D partitions can be rendered");
    }
    const auto width = grid.extent(0);
    const auto height = grid.extent(1);
    std::string out = fmt::format("P6\n{} {}\n255\n", width, height);
    out.reserve(out.size() + width * height * 3);
    for (std::size_t row = 0; row < height; ++row) {
        const auto n = height - 1 - row;
        for (std::size_t m = 0; m < width; ++m) {
            for (auto c : label_color(partition[grid.flat(m, n)])) {
                out.push_back(static_cast<char>(c));
            }
        }
    }
    return out;
}

void render_partition(const Partition& partition, const fs::path& path) {
    write_file_atomic(path, partition_ppm(partition));
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

enum class Mode { run, example1, example2 };

const char* stop_reason_name(StopReason r) {
    switch (r) {
    case StopReason::fixed_point:
        return "fixed_point";
    case StopReason::cycle:
        return "cycle";
    case StopReason::max_iters:
        return "max_iters";
    }
    return "unknown";
}

void apply_options(ExperimentConfig& cfg, const RunOptions& options) {
    if (options.out_dir) {
        cfg.out_dir = *options.out_dir;
    }
    if (options.max_iters) {
        if (*options.max_iters < 1) {
            throw ConfigError("--max-iters must be >= 1");
        }
        cfg.cm.max_iters = *options.max_iters;
    }
    if (options.mi_tol) {
        if (!(*options.mi_tol >= 0)) {
            throw ConfigError("--mi-tol must be >= 0");
        }
        cfg.cm.mi_tol = *options.mi_tol;
    }
}

std::optional<double> threshold_of(const Partition& p) {
    if (p.grid().dims() != 1) {
        return std::nullopt;
    }
    try {
        return extract_threshold_1d(p);
    } catch (const MultiBoundaryError&) {
        return std::nullopt;
    }
}

void write_partitions(const IterationTrace& trace, const Partition& init, const fs::path& dir, bool render,
                      std::ostream& err) {
    write_file_atomic(dir / "partition_iter_0.csv", partition_csv(init));
    for (std::size_t k = 0; k < trace.partitions.size(); ++k) {
        write_file_atomic(dir / fmt::format("partition_iter_{}.csv", k + 1), partition_csv(trace.partitions[k]));
    }
    if (!render) {
        return;
    }
    if (init.grid().dims() != 2) {
        err << "note: --render skipped, only 2D partitions can be rendered\n";
        return;
    }
    render_partition(init, dir / "partition_iter_0.ppm");
    for (std::size_t k = 0; k < trace.partitions.size(); ++k) {
        render_partition(trace.partitions[k], dir / fmt::format("partition_iter_{}.ppm", k + 1));
    }
}

int execute(ExperimentConfig cfg, const RunOptions& options, Mode mode, std::ostream& out, std::ostream& err) {
    try {
        apply_options(cfg, options);
        const auto setup = build_setup(cfg);
        const auto init = build_init(cfg, setup);
        const auto trace = run_cm(setup, init, cfg.cm);
        const auto& last = trace.records.back();

        write_file_atomic(cfg.out_dir / "trace.csv", trace_csv(trace));
        write_partitions(trace, init, cfg.out_dir, options.render, err);

        std::string report;
        report += fmt::format("converged = {}\n", trace.converged ? "true" : "false");
        report += fmt::format("stop_reason = {}\n", stop_reason_name(trace.stop_reason));
        report += fmt::format("iterations = {}\n", trace.records.size());
        report += fmt::format("shannon_mi_bits = {}\n", format_number(last.shannon_mi_bits));
        report += fmt::format("semantic_mi_bits = {}\n", format_number(last.semantic_mi_bits));
        std::string summary = fmt::format("converged={} iterations={} mi_bits={}", trace.converged ? "yes" : "no",
                                          trace.records.size(), format_number(last.shannon_mi_bits));
        if (const auto t = threshold_of(trace.final_partition)) {
            report += fmt::format("threshold = {}\n", format_number(*t));
            summary += fmt::format(" z*={}", format_number(*t));
        }
        if (trace.records.size() >= 2) {
            const double ratio = trace.records[1].shannon_mi_bits / last.shannon_mi_bits;
            report += fmt::format("mi_ratio_iter2 = {}\n", format_number(ratio));
            if (mode == Mode::example2) {
                summary += fmt::format(" mi_iter2_bits={} mi_ratio_iter2={}",
                                       format_number(trace.records[1].shannon_mi_bits), format_number(ratio));
            }
        }
        write_file_atomic(cfg.out_dir / "report.txt", report);

        const char* name = mode == Mode::example1 ? "example1" : mode == Mode::example2 ? "example2" : "run";
        out << name << ": " << summary << '\n';
        return trace.converged ? exit_converged : exit_not_converged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config_error;
    }
}

} // namespace

int cmd_run(const fs::path& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config_error;
    }
    return execute(std::move(cfg), options, Mode::run, out, err);
}

int cmd_example1(const RunOptions& options, std::ostream& out, std::ostream& err) {
    return execute(example1_config(), options, Mode::example1, out, err);
}

int cmd_example2(std::string_view init_kind, std::optional<std::uint64_t> seed, const RunOptions& options,
                 std::ostream& out, std::ostream& err) {
    InitSpec::Kind kind;
    std::uint64_t chosen_seed = seed.value_or(1);
    if (init_kind == "vertical") {
        kind = InitSpec::Kind::vertical;
    } else if (init_kind == "horizontal") {
        kind = InitSpec::Kind::horizontal;
    } else if (init_kind == "random") {
        kind = InitSpec::Kind::random;
    } else if (init_kind.starts_with("random:")) {
        const auto parsed = parse_number<std::uint64_t>(init_kind.substr(7));
        if (!parsed) {
            err << "error: bad seed in '" << init_kind << "'\n";
            return exit_config_error;
        }
        kind = InitSpec::Kind::random;
        chosen_seed = *parsed;
    } else {
        err << "error: unknown init kind '" << init_kind << "' (vertical|horizontal|random[:seed])\n";
        return exit_config_error;
    }
    auto cfg = example2_config(kind, chosen_seed);
    if (kind == InitSpec::Kind::random) {
        cfg.out_dir = fmt::format("out/example2_random_{}", chosen_seed);
    } else {
        cfg.out_dir = fmt::format("out/example2_{}", init_kind);
    }
    return execute(std::move(cfg), options, Mode::example2, out, err);
}

int cmd_compare(const fs::path& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
    try {
        auto cfg = load_config(config_path);
        apply_options(cfg, options);
        const auto setup = build_setup(cfg);
        const auto init = build_init(cfg, setup);
        const auto report = compare(setup, cfg.cm, init);

        write_file_atomic(cfg.out_dir / "compare.csv", compare_csv(report));
        write_file_atomic(cfg.out_dir / "trace.csv", trace_csv(report.mmi_trace));
        write_file_atomic(cfg.out_dir / "partition_mmi.csv", partition_csv(report.mmi_trace.final_partition));
        write_file_atomic(cfg.out_dir / "partition_mpp.csv", partition_csv(report.mpp_partition));
        if (options.render) {
            if (cfg.grid.dims() == 2) {
                render_partition(report.mmi_trace.final_partition, cfg.out_dir / "partition_mmi.ppm");
                render_partition(report.mpp_partition, cfg.out_dir / "partition_mpp.ppm");
            } else {
                err << "note: --render skipped, only 2D partitions can be rendered\n";
            }
        }
        for (const auto& v : report.violations) {
            err << "warning: " << v << '\n';
        }

        const auto t = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string("-"); };
        out << fmt::format("compare: mmi mi_bits={} error_rate={} threshold={} | mpp mi_bits={} error_rate={} "
                           "threshold={} | {}\n",
                           format_number(report.mmi_partition_mi), format_number(report.mmi_error_rate),
                           t(report.mmi_threshold), format_number(report.mpp_partition_mi),
                           format_number(report.mpp_error_rate), t(report.mpp_threshold),
                           report.equivalent ? "equivalent" : "different");
        return report.mmi_trace.converged ? exit_converged : exit_not_converged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_config_error;
    }
}

} // namespace cmmi
