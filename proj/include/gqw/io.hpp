#pragma once

// File formats: instance JSON, spectrum/trace/profile CSV, fit JSON and a binary
// spectrum cache.

#include "gqw/engine.hpp"
#include "gqw/problems.hpp"
#include "gqw/spectral.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace gqw {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

nlohmann::json instance_to_json(const QuboProblem& problem);
QuboProblem instance_from_json(const nlohmann::json& j);
void save_instance(const QuboProblem& problem, const std::filesystem::path& path);
QuboProblem load_instance(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// bitstring_index,energy,valid
void write_spectrum_csv(const SpectrumTable& spectrum, std::ostream& out);
/// t,gamma,energy_expectation,p_gs,bin_0,...
void write_trace_csv(const RunRecord& record, std::ostream& out);
/// bin_center_E,mean_gap,sample_count
void write_profile_csv(const GapBins& bins, std::ostream& out);
nlohmann::json fit_to_json(const PolynomialFit& fit);

/// Binary energy/validity cache keyed by the instance content.
std::string spectrum_cache_key(const QuboProblem& problem);
void write_spectrum_cache(const SpectrumTable& spectrum, const std::filesystem::path& path);
SpectrumTable read_spectrum_cache(const std::filesystem::path& path, ProblemKind kind);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace gqw
