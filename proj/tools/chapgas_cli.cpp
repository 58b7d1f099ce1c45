#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "chapgas/commands.hpp"
#include "chapgas/config.hpp"
#include "chapgas/output.hpp"

namespace {

const char* describe(const std::string& name) {
    if (name == "check") return "verify the structural assumptions on the initial data";
    if (name == "blowup") return "locate the cusp and first blowup point";
    if (name == "envelopes") return "trace both envelope arms from the cusp";
    if (name == "smooth") return "sample the classical solution at a pre-blowup time";
    if (name == "shock") return "integrate the delta-shock trajectory past blowup";
    if (name == "audit") return "run the shock and audit generalized mass/momentum";
    return "run the finite-volume oracle and compare with the characteristic solution";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"characteristic-map and delta-shock toolkit for the 1-D Chaplygin gas"};
    app.require_subcommand(1);
    std::string config_path;
    for (const std::string& name : chapgas::command_names()) {
        CLI::App* sub = app.add_subcommand(name, describe(name));
        sub->add_option("config", config_path, "run configuration file")->required();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // normalize usage errors onto the config-error code
    }
    const std::string command = app.get_subcommands().front()->get_name();

    const auto start = std::chrono::steady_clock::now();
    chapgas::RunConfig cfg;
    try {
        cfg = chapgas::parse_config_file(config_path);
    } catch (const chapgas::Error& e) {
        // The output directory may be unknown; report into the default one.
        std::fprintf(stderr, "%s\n", e.what());
        chapgas::Json rep;
        rep["schema_version"] = 1;
        rep["command"] = command;
        rep["status"] = "error";
        rep["failure"] = chapgas::Json{
            {"stage", "config"}, {"error_type", "config"}, {"message", e.what()}};
        try {
            std::filesystem::create_directories("out");
            chapgas::write_report("out/report.json", rep);
        } catch (...) {
        }
        return 2;
    }

    const chapgas::RunOutcome out = chapgas::run_command(command, cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Wall time goes to stderr only; the report files stay byte-reproducible.
    if (out.exit_code == 0) {
        std::fprintf(stderr, "%s: ok (%.3fs), outputs in %s\n", command.c_str(), wall,
                     cfg.output_dir.c_str());
    } else {
        const std::string msg = out.report.contains("failure")
                                    ? out.report["failure"]["message"].get<std::string>()
                                    : "unknown failure";
        std::fprintf(stderr, "%s: failed (exit %d, %.3fs): %s\n", command.c_str(),
                     out.exit_code, wall, msg.c_str());
    }
    return out.exit_code;
}
