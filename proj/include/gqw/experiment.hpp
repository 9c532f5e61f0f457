#pragma once

// Experiment plans: instances x algorithms x T grid, run into a resumable,
// checksummed report CSV, plus tidy figure-data exports.

#include "gqw/optimizer.hpp"
#include "gqw/problems.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gqw {

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { gqw, gqw_oracle, qw, qa };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct InstanceSpec {
    std::string id;
    /// Load from this file when set, otherwise generate from kind/size/seed.
    std::optional<std::filesystem::path> file;
    ProblemKind kind = ProblemKind::exact_cover;
    SizeParams size;
    std::uint64_t seed = 0;
};

struct ExperimentPlan {
    std::vector<InstanceSpec> instances;
    std::vector<Algorithm> algorithms;
    std::vector<double> t_grid;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer;
    double p_target = 0.9999;
    /// Rescale every instance to [0, 100] before running.
    bool rescale = true;
    bool record_traces = false;
    bool deterministic = true;
    std::filesystem::path out_dir = "results";
    std::size_t gap_bins = 100;

    /// Throws PlanError on an invalid plan.
    void validate() const;
    static ExperimentPlan from_json(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
};

/// 0.1, 0.2, ..., 12.0 built by integer steps.
std::vector<double> default_t_grid();
std::vector<double> t_grid_range(double start, double stop, double step);

struct ReportRow {
    std::string instance_id;
    std::string kind;
    std::size_t n = 0;
    double t = 0.0;
    std::string algorithm;
    double p_gs = 0.0;
    double e_psi = 0.0;
    double s_q = 0.0;
    double r = 0.0;
    double tts = 0.0;  // +inf when the ground state is never observed
    std::size_t n_opt = 0;
    std::uint64_t seed = 0;

    std::string key() const;
};

extern const char* const kReportHeader;

/// One CSV line without newline, ending in the crc32 checksum column.
std::string format_report_row(const ReportRow& row);
/// Returns nothing for malformed lines or checksum mismatches.
std::optional<ReportRow> parse_report_row(const std::string& line);

struct ReportReadResult {
    std::vector<ReportRow> rows;
    std::size_t rejected = 0;
};
ReportReadResult read_report(const std::filesystem::path& path);

struct RunSummary {
    std::filesystem::path report;
    std::size_t total_cells = 0;
    std::size_t skipped = 0;
    std::size_t executed = 0;
    std::size_t rejected_rows = 0;
};

/// Runs every missing (instance, algorithm, T) cell. Rows are appended in plan order.
/// With `cache_dir` set, spectra are read from and written to that directory.
RunSummary run_plan(const ExperimentPlan& plan,
                    const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Loads, rescales (if requested) and enumerates one instance of the plan.
QuboProblem resolve_instance(const InstanceSpec& spec, bool rescale);
SpectrumTable load_or_enumerate(const QuboProblem& problem,
                                const std::optional<std::filesystem::path>& cache_dir);

enum class Figure { sq_vs_t, t_vs_n, tts_vs_n, evolution_traces };
Figure figure_from_string(const std::string& name);

struct ExportOptions {
    std::vector<double> thresholds{0.01, 0.1, 0.9};
    /// Directory holding trace CSVs written by run_plan (evolution_traces only).
    std::filesystem::path trace_dir;
};

std::string export_figure_data(const std::vector<ReportRow>& report, Figure figure,
                               const ExportOptions& options = {});

std::string trace_file_name(const std::string& instance_id, Algorithm algorithm, double t);

}  // namespace gqw
