#pragma once

#include <map>
#include <optional>

#include "dqring/analytics.hpp"

#include <json.hpp>

namespace dqring {

constexpr const char* kCodeVersion = "dqring 1.0.0";
constexpr int kPresetExactMaxSpins = 12;
constexpr int kPresetStochasticMaxSpins = 14;

struct TimeGridSpec {
    double t_start = 0.0;
    double t_end = 10.0;
    int n_t = 11;
    enum class Spacing { linear, log } spacing = Spacing::linear;

    std::vector<double> points() const;
};

struct EstimatorConfig {
    EstimatorInfo::Kind kind = EstimatorInfo::Kind::exact;
    int n_states = 8;
    std::uint64_t seed = 1;
};

struct OverlayConfig {
    std::string path;
    std::string x_column;
    std::string y_column;
    std::string x_units = "hbar/J";  // expected: "hbar/J" (time) or "rad" (phase)
    std::string label;
};

struct RunConfig {
    std::vector<RingSpec> specs;
    TimeGridSpec time_grid;
    int n_phi = 0;  // 0: per-N default
    double dt = 0.01;
    bool convergence_check = false;
    EstimatorConfig estimator;
    std::optional<double> t_s;  // saturation onset override
    double t_max = 0.0;         // 0: time_grid.t_end
    std::string output_dir = "out";
    int workers = 1;
    std::vector<OverlayConfig> overlays;
    std::vector<std::string> notes;  // free-form, carried into the manifest

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// Throws std::invalid_argument with the offending entry on any contract
/// violation, including estimator cutoffs, before any compute starts.
void validate_config(const RunConfig& config);

struct RunManifest {
    std::string config_hash;
    std::string code_version;
    std::map<std::string, double> task_seconds;
    std::map<std::string, std::string> file_checksums;  // path relative to output_dir
    std::vector<std::string> warnings;
    std::map<std::string, std::uint64_t> seeds;

    nlohmann::json to_json() const;
};

/// Stable directory name of one ring spec inside the output tree.
std::string spec_label(const RingSpec& spec);

/// Executes the whole pipeline. Tasks whose output files all exist with
/// checksums matching an existing manifest are skipped; everything else is
/// (re)computed and rewritten byte-identically for exact-estimator configs.
RunManifest run(const RunConfig& config);

/// Figure-oriented parameter sets with system sizes capped to the desk-scale
/// limits above; the applied caps are recorded in config.notes.
RunConfig preset(const std::string& name);

/// Copies a reference curve into <output_dir>/overlays/<label>.csv in tidy
/// form. Empty input is reported as a warning and skipped; a units
/// declaration other than hbar/J or rad is recorded as a warning.
void overlay_reference(const OverlayConfig& overlay, const std::string& output_dir,
                       RunManifest& manifest);

}  // namespace dqring
