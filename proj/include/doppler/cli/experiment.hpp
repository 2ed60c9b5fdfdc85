#pragma once

// Mode dispatch, CSV tables and the JSON manifest.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "doppler/cli/config.hpp"

namespace doppler::cli {

/// Header plus rows of already formatted cells.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    /// Comma separated, header first, '\n' line ends.
    std::string to_csv() const;
};

/// %.17g, or "NA" for non-finite values.
std::string format_number(double v);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunResult {
    ResultTable table;
    std::vector<Check> checks;
    nlohmann::json summary = nlohmann::json::object();

    bool ok() const;
};

/// Column names of each mode's table.
std::vector<std::string> columns_for(Mode mode);

/// Runs the experiment without touching the filesystem, except that
/// simulate with export_maps writes map files next to output_path.
RunResult run(const ExperimentConfig& config);

/// Version strings of the toolkit and the libraries it links.
nlohmann::json versions();

/// run() plus output: CSV at output_path and <output_path>.manifest.json.
/// Errors thrown by the modules are recorded in the manifest. Returns the
/// process exit status: 0 iff every cross-check passed.
int run_and_write(const ExperimentConfig& config);

/// Writes a manifest describing a failure that happened before a config
/// could be built.
void write_error_manifest(const std::filesystem::path& path, const std::string& kind, const std::string& message);

}  // namespace doppler::cli
