#include "app/commands.hpp"
#include "app/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace drift_cli;

namespace {

struct Overrides {
    std::optional<std::size_t> max_iters;
    std::optional<double> tol;
    bool inverse_crime = false;
};

RunConfig resolve(const std::string& config_path, const Overrides& o) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (o.max_iters) {
        cfg.iteration.max_iters = *o.max_iters;
    }
    if (o.tol) {
        cfg.iteration.tol = *o.tol;
    }
    if (o.inverse_crime) {
        cfg.inverse_crime = true;
    }
    cfg.iteration.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift coefficient recovery from terminal observations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DRIFT_RECOVER_VERSION);

    std::string config_path;
    CommonOptions common;
    Overrides overrides;
    InvertOptions invert_opts;
    ExperimentOptions exp_opts;
    std::string seeds = "1";
    std::string manifest_path;

    auto common_flags = [&](CLI::App* sub, bool iteration_flags) {
        sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        sub->add_flag("--quiet", common.quiet, "Suppress progress messages");
        if (iteration_flags) {
            sub->add_option("--max-iters", overrides.max_iters, "Override iteration.max_iters");
            sub->add_option("--tol", overrides.tol, "Override iteration.tol");
        }
    };

    CLI::App* gen = app.add_subcommand("generate-data", "Synthesize terminal data g");
    common_flags(gen, false);
    gen->add_flag("--inverse-crime", overrides.inverse_crime,
                  "Generate the data on the inversion grid");

    CLI::App* inv = app.add_subcommand("invert", "Recover the drift from a terminal data CSV");
    common_flags(inv, true);
    inv->add_option("--data", invert_opts.data, "Terminal data CSV")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    common_flags(mms, false);

    CLI::App* exp = app.add_subcommand("experiment", "Run a reference reconstruction pipeline");
    common_flags(exp, true);
    exp->add_option("name", exp_opts.name, "smooth, piecewise or character")->required();
    exp->add_option("--seeds", seeds, "Comma-separated noise seeds")->capture_default_str();
    exp->add_flag("--noise-only", exp_opts.noise_only, "Skip the noise-free run");
    exp->add_flag("--inverse-crime", overrides.inverse_crime,
                  "Generate the data on the inversion grid");

    CLI::App* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    rep->add_option("manifest", manifest_path, "manifest.json of an earlier run")
        ->required()
        ->check(CLI::ExistingFile);
    rep->add_option("--out", common.out, "Output directory")->required();
    rep->add_flag("--quiet", common.quiet, "Suppress progress messages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (rep->parsed()) {
            return cmd_replay(manifest_path, common);
        }
        const RunConfig cfg = resolve(config_path, overrides);
        if (gen->parsed()) {
            return cmd_generate_data(cfg, common);
        }
        if (inv->parsed()) {
            return cmd_invert(cfg, invert_opts, common);
        }
        if (mms->parsed()) {
            return cmd_mms(cfg, common);
        }
        exp_opts.seeds = parse_seed_list(seeds);
        return cmd_experiment(cfg, exp_opts, common);
    } catch (...) {
        std::string message;
        const int code = exit_code_for_current_exception(&message);
        std::cerr << "error: " << message << '\n';
        return code;
    }
}
