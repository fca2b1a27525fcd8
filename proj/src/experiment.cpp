#include "dsel/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "dsel/error.hpp"
#include "dsel/linkcap.hpp"
#include "dsel/ratecalc.hpp"

namespace dsel {

namespace {

constexpr std::uint64_t kMseField = 10;

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string line_error(int line, const std::string& msg) {
    return "config line " + std::to_string(line) + ": " + msg;
}

double parse_double(std::string_view v, int line, std::string_view key) {
    const std::string s(v);
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(x)) {
        throw ConfigError(line_error(line, "'" + std::string(key) + "' expects a number, got '" + s + "'"));
    }
    return x;
}

long long parse_int(std::string_view v, int line, std::string_view key) {
    const std::string s(v);
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) {
        throw ConfigError(line_error(line, "'" + std::string(key) + "' expects an integer, got '" + s + "'"));
    }
    return x;
}

std::vector<int> parse_int_list(std::string_view v, int line, std::string_view key) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const auto item = trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        out.push_back(static_cast<int>(parse_int(item, line, key)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError("invalid config field '" + std::string(field) + "': " + what);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::mse_surface: return "mse_surface";
        case ExperimentKind::rate_surface: return "rate_surface";
        case ExperimentKind::rate_section: return "rate_section";
        case ExperimentKind::capacity: return "capacity";
    }
    return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
    for (auto k : {ExperimentKind::mse_surface, ExperimentKind::rate_surface, ExperimentKind::rate_section,
                   ExperimentKind::capacity}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown experiment '" + std::string(name) +
                      "' (expected mse_surface, rate_surface, rate_section or capacity)");
}

std::vector<double> AlphaGrid::values() const {
    std::vector<double> out;
    for (int k = 0;; ++k) {
        const double v = std::round((start + k * step) * 1e12) / 1e12;
        if (v >= stop - 1e-9) break;
        out.push_back(v);
    }
    out.push_back(stop);
    return out;
}

void ExperimentConfig::validate() const {
    require(grid.step > 0.0, "alpha_step", "must be > 0");
    require(grid.start >= 0.0, "alpha_start", "must be >= 0");
    require(grid.start <= grid.stop, "alpha_start", "must not exceed alpha_stop");
    require(grid.stop < 1.0, "alpha_stop", "must be < 1");
    require(n_r >= 1, "n_r", "must be >= 1");
    require(n_t >= 1, "n_t", "must be >= 1");
    require(sigma2_h > 0.0, "sigma2_h", "must be > 0");
    require(d_total > 0.0, "d_total", "must be > 0");
    require(d() <= sigma2_h, "d_total", "per-entry distortion d_total/(n_r*n_t) = " + fmt_num(d()) +
                                            " exceeds sigma2_h");
    require(!bits_list.empty(), "bits", "needs at least one entry");
    for (int b : bits_list) require(b >= 1 && b <= 20, "bits", "entries must lie in [1, 20]");
    require(trials >= 1, "trials", "must be >= 1");
    require(field_m >= 2, "field_m", "must be >= 2");
    require(field_n >= 2, "field_n", "must be >= 2");
    require(alpha_t >= 0.0 && alpha_t <= 1.0, "alpha_t", "must lie in [0, 1]");
    require(alpha_f >= 0.0 && alpha_f <= 1.0, "alpha_f", "must lie in [0, 1]");
    require(alpha_t < 1.0 || alpha_f < 1.0, "alpha_t", "alpha_t = alpha_f = 1 is degenerate");
    require(lloyd_max_iter >= 1, "lloyd_max_iter", "must be >= 1");
    require(lloyd_rel_tol >= 0.0, "lloyd_rel_tol", "must be >= 0");
    require(lloyd_passes >= 1, "lloyd_passes", "must be >= 1");
    require(workers >= 1, "workers", "must be >= 1");
    require(mc_samples >= 1, "mc_samples", "must be >= 1");
    if (experiment == ExperimentKind::capacity) {
        const int max_bits = *std::max_element(bits_list.begin(), bits_list.end());
        require(training_size >= (std::size_t{1} << max_bits), "training_size",
                "must hold at least 2^max(bits) vectors");
    }
}

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    os << "experiment=" << to_string(experiment) << " alpha_start=" << fmt_num(grid.start)
       << " alpha_stop=" << fmt_num(grid.stop) << " alpha_step=" << fmt_num(grid.step) << " n_r=" << n_r
       << " n_t=" << n_t << " sigma2_h=" << fmt_num(sigma2_h) << " d_total=" << fmt_num(d_total)
       << " d=" << fmt_num(d()) << " snr_db=" << fmt_num(snr_db) << " bits=";
    for (std::size_t i = 0; i < bits_list.size(); ++i) os << (i ? "," : "") << bits_list[i];
    os << " bits_unit=per_matrix trials=" << trials << " field_m=" << field_m << " field_n=" << field_n
       << " seed=" << seed << " alpha_t=" << fmt_num(alpha_t) << " alpha_f=" << fmt_num(alpha_f)
       << " training_size=" << training_size << " lloyd_max_iter=" << lloyd_max_iter
       << " lloyd_rel_tol=" << fmt_num(lloyd_rel_tol) << " lloyd_passes=" << lloyd_passes
       << " mc_samples=" << mc_samples;
    return os.str();
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    using Setter = std::function<void(std::string_view, int)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"experiment", [&](auto v, int) { cfg.experiment = parse_experiment(v); }},
        {"alpha_start", [&](auto v, int l) { cfg.grid.start = parse_double(v, l, "alpha_start"); }},
        {"alpha_stop", [&](auto v, int l) { cfg.grid.stop = parse_double(v, l, "alpha_stop"); }},
        {"alpha_step", [&](auto v, int l) { cfg.grid.step = parse_double(v, l, "alpha_step"); }},
        {"n_r", [&](auto v, int l) { cfg.n_r = static_cast<int>(parse_int(v, l, "n_r")); }},
        {"n_t", [&](auto v, int l) { cfg.n_t = static_cast<int>(parse_int(v, l, "n_t")); }},
        {"sigma2_h", [&](auto v, int l) { cfg.sigma2_h = parse_double(v, l, "sigma2_h"); }},
        {"d_total", [&](auto v, int l) { cfg.d_total = parse_double(v, l, "d_total"); }},
        {"snr_db", [&](auto v, int l) { cfg.snr_db = parse_double(v, l, "snr_db"); }},
        {"bits", [&](auto v, int l) { cfg.bits_list = parse_int_list(v, l, "bits"); }},
        {"trials", [&](auto v, int l) { cfg.trials = static_cast<int>(parse_int(v, l, "trials")); }},
        {"field_m", [&](auto v, int l) { cfg.field_m = static_cast<int>(parse_int(v, l, "field_m")); }},
        {"field_n", [&](auto v, int l) { cfg.field_n = static_cast<int>(parse_int(v, l, "field_n")); }},
        {"seed", [&](auto v, int l) { cfg.seed = static_cast<std::uint64_t>(parse_int(v, l, "seed")); }},
        {"out", [&](auto v, int) { cfg.out_path = std::string(v); }},
        {"alpha_t", [&](auto v, int l) { cfg.alpha_t = parse_double(v, l, "alpha_t"); }},
        {"alpha_f", [&](auto v, int l) { cfg.alpha_f = parse_double(v, l, "alpha_f"); }},
        {"training_size",
         [&](auto v, int l) {
             const auto n = parse_int(v, l, "training_size");
             require(n >= 1, "training_size", "must be >= 1");
             cfg.training_size = static_cast<std::size_t>(n);
         }},
        {"lloyd_max_iter", [&](auto v, int l) { cfg.lloyd_max_iter = static_cast<int>(parse_int(v, l, "lloyd_max_iter")); }},
        {"lloyd_rel_tol", [&](auto v, int l) { cfg.lloyd_rel_tol = parse_double(v, l, "lloyd_rel_tol"); }},
        {"lloyd_passes", [&](auto v, int l) { cfg.lloyd_passes = static_cast<int>(parse_int(v, l, "lloyd_passes")); }},
        {"workers", [&](auto v, int l) { cfg.workers = static_cast<int>(parse_int(v, l, "workers")); }},
        {"mc_samples",
         [&](auto v, int l) {
             const auto n = parse_int(v, l, "mc_samples");
             require(n >= 1, "mc_samples", "must be >= 1");
             cfg.mc_samples = static_cast<std::size_t>(n);
         }},
    };

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(line_error(line_no, "expected key = value"));
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            const auto it = setters.find(key);
            if (it == setters.end()) throw ConfigError(line_error(line_no, "unknown key '" + std::string(key) + "'"));
            if (value.empty()) throw ConfigError(line_error(line_no, "missing value for '" + std::string(key) + "'"));
            it->second(value, line_no);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void CsvTable::add_row(std::vector<CsvCell> row) {
    if (row.size() != header.size()) throw DomainError("CsvTable: row width differs from header");
    for (const auto& cell : row) {
        if (const double* v = std::get_if<double>(&cell); v != nullptr && !std::isfinite(*v)) {
            throw DomainError("CsvTable: non-finite value");
        }
    }
    rows.push_back(std::move(row));
}

std::size_t CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DomainError("CsvTable: no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::string_view name) const {
    return std::get<double>(rows.at(row).at(column(name)));
}

const std::string& CsvTable::text(std::size_t row, std::string_view name) const {
    return std::get<std::string>(rows.at(row).at(column(name)));
}

std::string to_csv(const CsvTable& table, const std::string& comment) {
    std::string out = "# " + comment + "\n";
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const double* v = std::get_if<double>(&row[i])) {
                out += fmt_num(*v);
            } else {
                out += std::get<std::string>(row[i]);
            }
        }
        out += '\n';
    }
    return out;
}

CsvTable run_mse_surface(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::mse_surface) throw ConfigError("run_mse_surface: experiment must be mse_surface");
    cfg.validate();
    CsvTable table{{"alpha_t", "alpha_f", "mse_analytic", "mse_montecarlo", "mc_stderr"}, {}};
    const auto grid = cfg.grid.values();
    const auto interior = static_cast<std::size_t>((cfg.field_m - 1) * (cfg.field_n - 1));
    const std::size_t fields = std::max<std::size_t>(2, (cfg.mc_samples + interior - 1) / interior);
    const double entries = static_cast<double>(cfg.n_r * cfg.n_t);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const CorrelationParams params(grid[i], grid[j], cfg.sigma2_h);
            const PredictorCoeffs c = predictor_coeffs(grid[i], grid[j], cfg.sigma2_h);
            // one batch per independent field; interior points within a field
            // are correlated, so the standard error uses the batch means
            double sum = 0.0;
            double sum_sq = 0.0;
            for (std::size_t f = 0; f < fields; ++f) {
                const auto field = gen_field(params, cfg.field_m, cfg.field_n, cfg.n_r, cfg.n_t,
                                             Rng(cfg.seed, {kMseField, i, j, f}).id());
                double acc = 0.0;
                for (int m = 1; m < cfg.field_m; ++m) {
                    for (int n = 1; n < cfg.field_n; ++n) {
                        acc += (field.at(m, n) - predict(field.at(m - 1, n), field.at(m, n - 1), c)).squaredNorm();
                    }
                }
                const double batch = acc / (static_cast<double>(interior) * entries);
                sum += batch;
                sum_sq += batch * batch;
            }
            const double nf = static_cast<double>(fields);
            const double mean = sum / nf;
            const double var = std::max(0.0, (sum_sq - nf * mean * mean) / (nf - 1.0));
            table.add_row({grid[i], grid[j], c.mse, mean, std::sqrt(var / nf)});
        }
    }
    return table;
}

CsvTable run_rate_surface(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::rate_surface) throw ConfigError("run_rate_surface: experiment must be rate_surface");
    cfg.validate();
    CsvTable table{{"alpha_t", "alpha_f", "bits_2d"}, {}};
    const auto grid = cfg.grid.values();
    for (double at : grid) {
        for (double af : grid) {
            table.add_row({at, af, rate_diff_2d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d(), at, af).bits_total});
        }
    }
    return table;
}

CsvTable run_rate_section(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::rate_section) throw ConfigError("run_rate_section: experiment must be rate_section");
    cfg.validate();
    CsvTable table{{"alpha", "bits_2d", "bits_1d", "bits_nondiff", "reduction_2d_vs_1d"}, {}};
    const double nondiff = rate_nondiff(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d()).bits_total;
    for (double a : cfg.grid.values()) {
        const double two = rate_diff_2d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d(), a, a).bits_total;
        const double one = rate_diff_1d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d(), a).bits_total;
        const double reduction = one > 0.0 ? 1.0 - two / one : 0.0;
        table.add_row({a, two, one, nondiff, reduction});
    }
    return table;
}

LinkSetup link_setup(const ExperimentConfig& cfg) {
    LinkSetup s;
    s.params = CorrelationParams(cfg.alpha_t, cfg.alpha_f, cfg.sigma2_h);
    s.n_r = cfg.n_r;
    s.n_t = cfg.n_t;
    s.a2_amp = snr_db_to_a2(cfg.snr_db);
    s.trials = cfg.trials;
    s.field_m = cfg.field_m;
    s.field_n = cfg.field_n;
    s.seed = cfg.seed;
    s.lloyd.max_iter = cfg.lloyd_max_iter;
    s.lloyd.rel_tol = cfg.lloyd_rel_tol;
    s.training_size = cfg.training_size;
    s.lloyd_passes = cfg.lloyd_passes;
    s.workers = cfg.workers;
    return s;
}

CapacitySweep run_capacity_sweep(const ExperimentConfig& cfg, const ChannelSource* source) {
    if (cfg.experiment != ExperimentKind::capacity) throw ConfigError("run_capacity: experiment must be capacity");
    cfg.validate();
    FeedbackSimulator sim(link_setup(cfg));
    const SeededChannelSource seeded(sim.setup().params, cfg.field_m, cfg.field_n, cfg.n_r, cfg.n_t, cfg.seed);
    const ChannelSource& src = source != nullptr ? *source : seeded;

    CapacitySweep sweep;
    sweep.perfect = sim.run(FeedbackScheme::perfect_csi, 0, src);
    for (int b : cfg.bits_list) {
        for (auto s : {FeedbackScheme::lloyd_2d, FeedbackScheme::lloyd_1d, FeedbackScheme::theory_2d,
                       FeedbackScheme::theory_1d}) {
            sweep.results.emplace(std::make_pair(b, s), sim.run(s, b, src));
        }
        sweep.codebooks.push_back(sim.full_codebook(b));
        sweep.codebooks.push_back(sim.differential_codebook(FeedbackScheme::lloyd_2d, b));
        sweep.codebooks.push_back(sim.differential_codebook(FeedbackScheme::lloyd_1d, b));
    }
    return sweep;
}

CsvTable run_capacity(const ExperimentConfig& cfg) { return capacity_table(cfg, run_capacity_sweep(cfg)); }

CsvTable capacity_table(const ExperimentConfig& cfg, const CapacitySweep& sweep) {
    CsvTable table{{"bits", "scheme", "capacity_mean", "stderr", "d_per_entry"}, {}};
    for (int b : cfg.bits_list) {
        for (auto s : {FeedbackScheme::lloyd_2d, FeedbackScheme::lloyd_1d, FeedbackScheme::theory_2d,
                       FeedbackScheme::theory_1d}) {
            const auto& r = sweep.results.at({b, s});
            table.add_row({static_cast<double>(b), std::string(to_string(s)), r.mean, r.std_err, r.d_per_entry});
        }
        table.add_row({static_cast<double>(b), std::string(to_string(FeedbackScheme::perfect_csi)),
                       sweep.perfect.mean, sweep.perfect.std_err, 0.0});
    }
    return table;
}

CsvTable run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::mse_surface: return run_mse_surface(cfg);
        case ExperimentKind::rate_surface: return run_rate_surface(cfg);
        case ExperimentKind::rate_section: return run_rate_section(cfg);
        case ExperimentKind::capacity: return run_capacity(cfg);
    }
    throw ConfigError("unknown experiment");
}

std::string experiment_csv(const ExperimentConfig& cfg) { return to_csv(run_experiment(cfg), cfg.echo()); }

}  // namespace dsel
