#ifndef AGMONLAB_IO_HPP
#define AGMONLAB_IO_HPP

#include "agmonlab/scenarios.hpp"

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace agmonlab {

/** Configuration problems map to exit code 2. */
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Scenario scenario;
    std::uint64_t seed = 12345;
    long n_samples = 20000;
    double dt = 0.0;                    // 0: scenario default
    std::vector<double> alpha_grid;     // empty: module default
    std::string out_dir = ".";
};

/** Parse and validate the scenario JSON document:
 * {"scenario": str, "params": {..}, "grid": {"extent": [[lo,hi],..],
 *  "n": [..]}, "lambda": number|"eigensolve", "delta": number}. */
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

/** "lo:hi:n" (linear) or "lo:hi:nlog" (log-spaced). */
std::vector<double> parse_alpha_grid(const std::string& spec);

/** CSV with '#'-prefixed provenance lines; fixed column order, %.17g. */
void write_csv(const std::string& path, const std::vector<std::string>& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& text);

/** Provenance lines shared by every writer (seed, grid, build id). */
std::vector<std::string> provenance_lines(const RunConfig& cfg);

} // namespace agmonlab

#endif
