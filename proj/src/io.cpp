#include "agmonlab/io.hpp"

#include "agmonlab/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#ifndef AGMONLAB_GIT_DESCRIBE
#define AGMONLAB_GIT_DESCRIBE "unknown"
#endif

namespace agmonlab {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
}

} // namespace

Scenario scenario_from_json(const json& j) {
    require(j.is_object(), "document must be a JSON object");
    static const char* known[] = {"scenario", "params", "grid", "lambda", "delta"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        require(ok, "unknown key '" + it.key() + "'");
    }
    require(j.contains("scenario") && j["scenario"].is_string(),
            "'scenario' (string) is required");

    std::map<std::string, double> params;
    if (j.contains("params")) {
        require(j["params"].is_object(), "'params' must be an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            require(it.value().is_number(), "param '" + it.key() + "' must be numeric");
            params[it.key()] = it.value().get<double>();
        }
    }

    Scenario s;
    try {
        s = scenario_by_name(j["scenario"].get<std::string>(), params);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    if (j.contains("grid")) {
        const auto& gj = j["grid"];
        require(gj.is_object() && gj.contains("extent") && gj.contains("n"),
                "'grid' needs 'extent' and 'n'");
        std::vector<std::array<double, 2>> extent;
        for (const auto& ax : gj["extent"]) {
            require(ax.is_array() && ax.size() == 2, "extent axes are [lo, hi] pairs");
            extent.push_back({ax[0].get<double>(), ax[1].get<double>()});
        }
        std::vector<int> n;
        for (const auto& v : gj["n"]) {
            require(v.is_number_integer(), "'n' entries must be integers");
            n.push_back(v.get<int>());
        }
        try {
            s.grid = build_grid(extent, n);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    if (j.contains("lambda")) {
        const auto& lj = j["lambda"];
        if (lj.is_string()) {
            require(lj.get<std::string>() == "eigensolve",
                    "'lambda' must be a number or \"eigensolve\"");
            s.eigensolve = true;
        } else {
            require(lj.is_number(), "'lambda' must be a number or \"eigensolve\"");
            s.eigensolve = false;
            s.lambda_fixed = lj.get<double>();
        }
    }

    if (j.contains("delta")) {
        require(j["delta"].is_number() && j["delta"].get<double>() >= 0.0,
                "'delta' must be a nonnegative number");
        s.delta = j["delta"].get<double>();
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["scenario"] = s.name;
    json params = json::object();
    for (const auto& [k, v] : s.potential.params) params[k] = v;
    j["params"] = params;
    json extent = json::array();
    json n = json::array();
    for (int a = 0; a < s.grid.dim; ++a) {
        extent.push_back({s.grid.origin[a], s.grid.origin[a] + (s.grid.n[a] - 1) * s.grid.h[a]});
        n.push_back(s.grid.n[a]);
    }
    j["grid"] = {{"extent", extent}, {"n", n}};
    if (s.eigensolve)
        j["lambda"] = "eigensolve";
    else
        j["lambda"] = s.lambda_fixed;
    j["delta"] = s.delta;
    return j;
}

std::vector<double> parse_alpha_grid(const std::string& spec) {
    double lo = 0, hi = 0;
    int n = 0;
    char tail[8] = {0};
    const int got = std::sscanf(spec.c_str(), "%lf:%lf:%d%3s", &lo, &hi, &n, tail);
    if (got < 3) throw ConfigError("config: alpha grid must be lo:hi:n or lo:hi:nlog");
    const std::string t(tail);
    if (t == "log") {
        try {
            return log_spaced(lo, hi, n);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }
    if (!t.empty()) throw ConfigError("config: alpha grid suffix must be 'log'");
    if (!(hi > lo) || n < 2) throw ConfigError("config: alpha grid needs lo < hi, n >= 2");
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& provenance,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& line : provenance) std::fprintf(f, "# %s\n", line.c_str());
    for (std::size_t c = 0; c < columns.size(); ++c)
        std::fprintf(f, "%s%s", columns[c].c_str(), c + 1 == columns.size() ? "\n" : ",");
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            std::fprintf(f, "%.17g%s", row[c], c + 1 == row.size() ? "\n" : ",");
    }
    std::fclose(f);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
}

std::vector<std::string> provenance_lines(const RunConfig& cfg) {
    std::vector<std::string> lines;
    lines.push_back(std::string("agmonlab ") + AGMONLAB_GIT_DESCRIBE);
    char buf[256];
    std::snprintf(buf, sizeof buf, "scenario=%s seed=%llu grid=%dx%d h=%.9g,%.9g",
                  cfg.scenario.name.c_str(), (unsigned long long)cfg.seed,
                  cfg.scenario.grid.n[0], cfg.scenario.grid.n[1], cfg.scenario.grid.h[0],
                  cfg.scenario.grid.h[1]);
    lines.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "n_samples=%ld dt=%.9g", cfg.n_samples, cfg.dt);
    lines.emplace_back(buf);
    return lines;
}

} // namespace agmonlab
