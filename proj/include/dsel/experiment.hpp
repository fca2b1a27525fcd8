#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsel/feedback.hpp"

namespace dsel {

enum class ExperimentKind { mse_surface, rate_surface, rate_section, capacity };

std::string_view to_string(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_experiment(std::string_view name);

struct AlphaGrid {
    double start = 0.0;
    double stop = 0.95;
    double step = 0.05;

    /// start, start + step, ... below stop, then stop itself.
    [[nodiscard]] std::vector<double> values() const;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::mse_surface;
    AlphaGrid grid;
    int n_r = 2;
    int n_t = 2;
    double sigma2_h = 1.0;
    double d_total = 0.1;  ///< total distortion budget D per matrix
    double snr_db = 5.0;
    std::vector<int> bits_list{2, 4, 6, 8, 10, 12};
    int trials = 2000;
    int field_m = 8;
    int field_n = 8;
    std::uint64_t seed = 1;
    std::string out_path;
    // capacity experiment
    double alpha_t = 0.9;
    double alpha_f = 0.9;
    std::size_t training_size = 100000;
    int lloyd_max_iter = 200;
    double lloyd_rel_tol = 1e-6;
    int lloyd_passes = 2;
    int workers = 1;
    // mse_surface experiment: interior prediction samples per grid point
    std::size_t mc_samples = 100000;

    /// Per-entry distortion d = D / (N_r N_t).
    [[nodiscard]] double d() const { return d_total / static_cast<double>(n_r * n_t); }

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Single-line `key=value` rendering of every resolved field.
    [[nodiscard]] std::string echo() const;
};

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored. Unspecified keys keep their defaults. Throws ConfigError with the
/// line number on malformed input or unknown keys, and with the field name
/// on invariant violations.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

using CsvCell = std::variant<double, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    /// Appends a row; throws DomainError if its width differs from the header
    /// or a numeric cell is not finite.
    void add_row(std::vector<CsvCell> row);
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] double number(std::size_t row, std::string_view name) const;
    [[nodiscard]] const std::string& text(std::size_t row, std::string_view name) const;
};

/// `# <comment>` line, column header, then rows. Numbers use 12 significant digits.
std::string to_csv(const CsvTable& table, const std::string& comment);

CsvTable run_mse_surface(const ExperimentConfig& cfg);
CsvTable run_rate_surface(const ExperimentConfig& cfg);
CsvTable run_rate_section(const ExperimentConfig& cfg);
CsvTable run_capacity(const ExperimentConfig& cfg);

/// Per-trial capacities behind run_capacity, keyed by (bits, scheme).
struct CapacitySweep {
    std::map<std::pair<int, FeedbackScheme>, CapacityEstimate> results;
    CapacityEstimate perfect;
    std::vector<Codebook> codebooks;  ///< every codebook trained for the sweep
};
CapacitySweep run_capacity_sweep(const ExperimentConfig& cfg, const ChannelSource* source = nullptr);
/// Table layout of run_capacity for an existing sweep over cfg.bits_list.
CsvTable capacity_table(const ExperimentConfig& cfg, const CapacitySweep& sweep);

/// Dispatches on cfg.experiment.
CsvTable run_experiment(const ExperimentConfig& cfg);

/// Full CSV document for `cfg`: config echo line plus table.
std::string experiment_csv(const ExperimentConfig& cfg);

LinkSetup link_setup(const ExperimentConfig& cfg);

}  // namespace dsel
