#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>

#include "dqring/io.hpp"
#include "dqring/runner.hpp"

namespace {

using dqring::RunConfig;
using nlohmann::json;

// Applies --set /json/pointer=value overrides; values parse as JSON when
// possible and fall back to strings.
json apply_overrides(json config, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--set expects /pointer=value, got: " + kv);
        const std::string pointer = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        config[json::json_pointer(pointer)] = value;
    }
    return config;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      const std::string& output_dir_flag) {
    json j = json::parse(dqring::io::read_file(path));
    j = apply_overrides(std::move(j), overrides);
    RunConfig config = RunConfig::from_json(j);
    if (!output_dir_flag.empty()) config.output_dir = output_dir_flag;
    // The environment variable roots relative output paths; absolute paths win.
    if (const char* env_root = std::getenv("DQRING_OUTPUT_ROOT")) {
        const std::filesystem::path out(config.output_dir);
        if (out.is_relative()) config.output_dir = (std::filesystem::path(env_root) / out).string();
    }
    return config;
}

int execute(const RunConfig& config) {
    const dqring::RunManifest manifest = dqring::run(config);
    std::printf("wrote %zu files under %s\n", manifest.file_checksums.size(),
                config.output_dir.c_str());
    for (const auto& w : manifest.warnings) std::printf("warning: %s\n", w.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-ring echo, coherence-spectrum and cluster-size simulator"};
    app.require_subcommand(1);

    std::string config_path, output_dir, preset_name, preset_out = "-";
    std::vector<std::string> overrides;
    std::string overlay_path, overlay_x = "t", overlay_y = "value", overlay_units = "hbar/J",
                overlay_label = "reference";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "run configuration JSON")->required();
        cmd->add_option("--set", overrides, "override a config key, e.g. --set /estimator/n_states=16");
        cmd->add_option("-o,--output-dir", output_dir, "override output directory");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute a configuration");
    add_common(cmd_run);
    CLI::App* cmd_resume = app.add_subcommand("resume", "re-run, reusing unchanged outputs");
    add_common(cmd_resume);
    CLI::App* cmd_validate = app.add_subcommand("validate", "check a configuration and exit");
    add_common(cmd_validate);

    CLI::App* cmd_preset = app.add_subcommand("preset", "emit a named configuration");
    cmd_preset->add_option("name", preset_name, "fig2 | fig3 | fig4 | fig5 | fig6")->required();
    cmd_preset->add_option("-o,--output", preset_out, "file to write ('-' for stdout)");

    CLI::App* cmd_overlay = app.add_subcommand("overlay", "register a reference curve");
    add_common(cmd_overlay);
    cmd_overlay->add_option("csv", overlay_path, "reference CSV file")->required();
    cmd_overlay->add_option("--x", overlay_x, "x column name");
    cmd_overlay->add_option("--y", overlay_y, "value column name");
    cmd_overlay->add_option("--x-units", overlay_units, "declared x units (hbar/J or rad)");
    cmd_overlay->add_option("--label", overlay_label, "overlay label");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_preset->parsed()) {
            const std::string text = dqring::preset(preset_name).to_json().dump(2) + "\n";
            if (preset_out == "-")
                std::fputs(text.c_str(), stdout);
            else
                dqring::io::write_file(preset_out, text);
            return 0;
        }
        RunConfig config = load_config(config_path, overrides, output_dir);
        if (cmd_validate->parsed()) {
            dqring::validate_config(config);
            std::printf("config ok: %zu spec(s)\n", config.specs.size());
            return 0;
        }
        if (cmd_overlay->parsed()) {
            dqring::RunManifest manifest;
            manifest.code_version = dqring::kCodeVersion;
            dqring::OverlayConfig ov{overlay_path, overlay_x, overlay_y, overlay_units, overlay_label};
            dqring::overlay_reference(ov, config.output_dir, manifest);
            for (const auto& w : manifest.warnings) std::printf("warning: %s\n", w.c_str());
            return 0;
        }
        if (cmd_resume->parsed() &&
            !std::filesystem::exists(std::filesystem::path(config.output_dir) / "manifest.json")) {
            std::fprintf(stderr, "resume: no manifest under %s\n", config.output_dir.c_str());
            return 1;
        }
        return execute(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
