#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "uavplan/harness.hpp"

using namespace uavplan;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string trace_csv(const PipelineResult& res) {
    std::ostringstream out;
    out.precision(12);
    out << "algorithm,iteration,value\n";
    for (std::size_t i = 0; i < res.alg1_trace.size(); ++i)
        out << "placement_pathloss," << i << ',' << res.alg1_trace[i] << '\n';
    for (std::size_t i = 0; i < res.sca.objective_history.size(); ++i)
        out << "allocation_objective," << i << ',' << res.sca.objective_history[i] << '\n';
    for (std::size_t i = 0; i < res.sca.eta_history.size(); ++i)
        out << "allocation_sum_eta_bps," << i << ',' << res.sca.eta_history[i] << '\n';
    return out.str();
}

std::string plan_json(const PipelineResult& res) {
    std::string out = "{\n\"deployment\": ";
    out += res.plan ? res.plan->to_json() : "null";
    out += ",\n\"allocation\": ";
    out += res.allocation ? res.allocation->to_json() : "null";
    out += "\n}\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uavplan: multi-UAV OFDMA downlink planner"};
    app.require_subcommand(1);

    std::string config_path, scheme_tag = "proposed", out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file path")->required();
        cmd->add_option("--scheme", scheme_tag, "pipeline scheme tag");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { seed = v; seed_given = true; },
            "override the config seed");
    };

    auto* run_cmd = app.add_subcommand("run", "single pipeline run");
    add_common(run_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "cross-product experiment");
    std::string axis_name;
    std::string values_csv;
    int n_seeds = 20;
    add_common(sweep_cmd);
    sweep_cmd->add_option("--axis", axis_name, "one of N, phi, environment, scheme")->required();
    sweep_cmd->add_option("--values", values_csv, "comma-separated axis values")->required();
    sweep_cmd->add_option("--seeds", n_seeds, "Monte-Carlo seeds per cell");

    CLI11_PARSE(app, argc, argv);

    SystemParams params;
    EnvironmentParams env;
    try {
        std::tie(params, env) = load_config(config_path);
        if (seed_given) params.rng_seed = seed;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::filesystem::create_directories(out_dir);
        const Scheme scheme = scheme_from_string(scheme_tag);

        if (run_cmd->parsed()) {
            PipelineResult res = run_pipeline(params, env, scheme, params.rng_seed);
            MetricsReport rep;
            rep.rows.push_back(res.row);
            const auto dir = std::filesystem::path(out_dir);
            write_file(dir / "metrics.csv", rep.to_csv());
            write_file(dir / ("trace_" + std::to_string(params.rng_seed) + ".csv"),
                       trace_csv(res));
            write_file(dir / ("plan_" + std::to_string(params.rng_seed) + ".json"),
                       plan_json(res));
            std::cout << rep.to_csv();
            return res.row.failed ? 2 : 0;
        }

        // sweep
        std::vector<std::string> values;
        std::istringstream vs(values_csv);
        std::string tok;
        while (std::getline(vs, tok, ',')) values.push_back(tok);
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < n_seeds; ++i) seeds.push_back(params.rng_seed + i);

        MetricsReport rep = sweep(params, env, scheme, sweep_axis_from_string(axis_name),
                                  values, seeds);
        write_file(std::filesystem::path(out_dir) / "metrics.csv", rep.to_csv());
        int failures = 0;
        for (const auto& r : rep.rows) failures += r.failed ? 1 : 0;
        std::cout << "rows=" << rep.rows.size() << " failures=" << failures << " -> "
                  << (std::filesystem::path(out_dir) / "metrics.csv") << "\n";
        return failures == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
