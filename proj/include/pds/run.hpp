#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pds/montecarlo.hpp"
#include "pds/optimize.hpp"
#include "pds/synthesis.hpp"

namespace pds {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kCsvSchemaVersion = "1";

enum class Method { pds, pds_effective, mc, all };

enum class DesignFamily { tmd, cubic_nes, piecewise };

/// Design-campaign section of a run configuration.
struct OptimizeSection {
    DesignFamily family = DesignFamily::tmd;
    DesignObjective objective;
    GridSearchOptions grid;
    PiecewiseDesignOptions piecewise;
    bool overlays = true;
};

/// Fully resolved run description. Everything a command needs, including the
/// root seed, comes from here; re-parsing the manifest's config echo yields
/// the same runs byte for byte.
struct RunConfig {
    SystemModel system;
    ForcingModel forcing;
    Method method = Method::pds;
    std::vector<Quantity> quantities;  // empty means every (dof, derivative)
    RareOptions rare;
    SynthesisOptions synthesis;
    StatlinOptions statlin;
    MonteCarloOptions mc;
    std::optional<OptimizeSection> optimize;
    std::string output_dir = ".";
    std::uint64_t seed = 1;

    std::vector<Quantity> resolved_quantities() const;
};

/// Parse and validate a JSON run configuration. Unknown keys anywhere in the
/// tree are rejected, as are physically invalid models.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Resolved JSON echo of a config; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& config);

/// Shortest round-trip decimal representation of a double.
std::string format_csv_value(double x);

/// Per-bin log10-density comparison of a Monte-Carlo histogram against a
/// synthesized response law. Bins below min_count are kept in the rows but
/// excluded from the summary statistics.
struct PdfComparison {
    struct Row {
        double value = 0.0;
        std::uint64_t mc_count = 0;
        double mc_density = 0.0;
        double pds_density = 0.0;
        double log10_diff = 0.0;
        bool masked = false;  // true when the row counts toward the summary
    };
    std::vector<Row> rows;
    double max_diff = 0.0;
    double mean_diff = 0.0;
    std::size_t used = 0;
};

PdfComparison compare_histogram(const McHistogram& mc, const ResponsePdf& pds,
                                std::uint64_t min_count = 50,
                                std::size_t target_bins = 128);

/// Commands write their CSVs and manifest.json into out_dir and return 0.
int cmd_estimate(const RunConfig& config, const std::string& out_dir);
int cmd_validate(const RunConfig& config, const std::string& out_dir);
int cmd_optimize(const RunConfig& config, const std::string& out_dir);

/// Process exit code for an escaped exception: 2 for configuration errors,
/// 4 for model-assumption violations, 3 for numerical failures.
int exit_code_for(const std::exception& e);

} // namespace pds
