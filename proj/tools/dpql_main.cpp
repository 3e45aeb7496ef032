#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dpql/presets.hpp"
#include "dpql/runner.hpp"

namespace {

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::string out_dir;
    int workers = 1;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--preset", args.preset, "built-in preset name");
    cmd->add_option("--config", args.config_path, "config file overlaying the preset");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers, "worker threads for grids and scans");
    cmd->add_option("--seed", args.seed, "random seed recorded in outputs");
}

dpql::ExperimentConfig assemble_config(const CommonArgs& args, const std::string& default_preset) {
    dpql::KeyValues kv;
    const std::string preset = args.preset.empty() ? default_preset : args.preset;
    if (!preset.empty()) kv = dpql::make_preset(preset).kv;
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw dpql::ConfigError("cannot open config file " + args.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        for (const auto& [k, v] : dpql::parse_config_text(buf.str())) kv[k] = v;
    }
    if (args.seed >= 0) kv["experiment.seed"] = std::to_string(args.seed);
    return dpql::ExperimentConfig::from_keys(std::move(kv));
}

std::string resolve_out_dir(const CommonArgs& args) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (const char* env = std::getenv("DPQL_OUT_DIR")) return env;
    return "out";
}

int run_single(const CommonArgs& args, const std::string& default_preset,
               const std::vector<std::string>& allowed_kinds) {
    auto cfg = assemble_config(args, default_preset);
    const std::string kind = cfg.str("experiment.kind");
    if (!allowed_kinds.empty() &&
        std::find(allowed_kinds.begin(), allowed_kinds.end(), kind) == allowed_kinds.end())
        throw dpql::ConfigError("experiment.kind '" + kind + "' does not belong to this subcommand");
    dpql::set_runner_workers(args.workers);
    auto art = dpql::run_experiment(cfg, resolve_out_dir(args));
    std::cout << "wrote " << art.csv_path.string() << "\n";
    std::cout << "wrote " << art.json_path.string() << "\n";
    if (!art.timeseries_path.empty()) std::cout << "wrote " << art.timeseries_path.string() << "\n";
    for (auto it = art.summary.scalars.begin(); it != art.summary.scalars.end(); ++it)
        std::cout << "  " << it.key() << " = " << it.value().dump() << "\n";
    return 0;
}

int run_grid_cmd(const CommonArgs& args) {
    auto cfg = assemble_config(args, "");
    auto grid = dpql::GridSpec::from_config(cfg);
    dpql::set_runner_workers(args.workers);
    auto res = dpql::run_grid(cfg, grid);
    namespace fs = std::filesystem;
    const std::string out_dir = resolve_out_dir(args);
    fs::create_directories(out_dir);
    const std::string prefix = cfg.str("experiment.out_prefix", "grid");
    const fs::path csv = fs::path(out_dir) / (prefix + "_grid.csv");
    const fs::path json = fs::path(out_dir) / (prefix + "_grid.json");
    std::ofstream(csv, std::ios::binary) << res.table_csv;
    nlohmann::json j;
    j["schema_version"] = dpql::result_schema_version;
    j["config"] = cfg.to_json();
    j["config_hash"] = cfg.hash();
    j["rows"] = res.rows;
    std::ofstream(json, std::ios::binary) << j.dump(2) << "\n";
    std::cout << "wrote " << csv.string() << "\n";
    std::cout << "wrote " << json.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dipole-phonon quantum logic simulator"};
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        std::string default_preset;
        std::vector<std::string> kinds;
    };
    const std::vector<Sub> subs = {
        {"modes", "chain equilibrium, normal modes, couplings", "modes_default", {"modes"}},
        {"sweep", "frequency sweeps: state-flip probability scans", "fig5a", {"sweep"}},
        {"vdd", "virtual-phonon exchange parameters and flopping curve", "vdd_default", {"vdd"}},
        {"prep",
         "state preparation and exchange protocols (ground, bell, product, iswap, ramps)",
         "figS1a",
         {"prep_ground", "prep_bell", "prep_product", "iswap", "adiabatic_delta"}},
        {"detect", "phonon-based molecular state detection", "detect_default", {"detect"}},
        {"pump", "m_J pumping transfer map", "pump_default", {"pump"}},
        {"noise", "electric-field-noise report", "noise_default", {"noise"}},
        {"tables", "species table with recomputed spectroscopy", "tables", {"tables"}},
    };

    std::vector<CommonArgs> arg_store(subs.size() + 1);
    int exit_code = 0;
    bool ran = false;
    for (size_t i = 0; i < subs.size(); ++i) {
        auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common(cmd, arg_store[i]);
        const Sub& sub = subs[i];
        CommonArgs& args = arg_store[i];
        cmd->callback([&args, &sub, &exit_code, &ran]() {
            exit_code = run_single(args, sub.default_preset, sub.kinds);
            ran = true;
        });
    }
    auto* grid_cmd = app.add_subcommand("grid", "parameter grid over any experiment config");
    add_common(grid_cmd, arg_store[subs.size()]);
    grid_cmd->callback([&]() {
        exit_code = run_grid_cmd(arg_store[subs.size()]);
        ran = true;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return ran ? exit_code : 0;
}
