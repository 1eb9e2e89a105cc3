// rwsgd — command-line front end.
//
//   rwsgd generate-graph --n 100 --p 0.3 --seed 1 --out graph.txt [--data-out data.csv]
//   rwsgd run            --config fig2a.cfg --out results/ --seeds 10 --jobs 4
//   rwsgd privacy-table  --epsilons 0,1,2 --thetas 0.2,1 --sup-l 10 --inf-l 1 [--deltas ...]
//   rwsgd diagnostics    --config fig2a.cfg --out diag.csv
//   rwsgd sweep          --config fig2a.cfg --param data.v --values 1,10 --out sweep/
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rwsgd/config.hpp"
#include "rwsgd/errors.hpp"
#include "rwsgd/graph.hpp"
#include "rwsgd/objective.hpp"
#include "rwsgd/runner.hpp"

namespace {

using namespace rwsgd;

// Per-parameter overrides shared by the experiment subcommands.
struct Overrides {
    std::string config;
    std::optional<std::string> n, p, v, d, q, T, variant, theta, epsilon, delta, mechanism, seeds, jobs;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "configuration file (key = value, [sections])");
        app->add_option("--n", n, "graph.n");
        app->add_option("--p", p, "graph.p");
        app->add_option("--v", v, "data.v");
        app->add_option("--d", d, "data.d");
        app->add_option("--q", q, "run.q");
        app->add_option("--T", T, "run.T");
        app->add_option("--variant", variant, "run.variants (comma-separated)");
        app->add_option("--theta", theta, "privacy.theta");
        app->add_option("--epsilon", epsilon, "privacy.epsilon");
        app->add_option("--delta", delta, "privacy.delta");
        app->add_option("--mechanism", mechanism, "privacy.mechanism");
        app->add_option("--seeds", seeds, "number of master seeds (1..N) or a list");
        app->add_option("--jobs", jobs, "parallel runs");
    }

    Config build() const {
        Config c = config.empty() ? Config{} : Config::load(config);
        auto put = [&](const char* key, const std::optional<std::string>& v) {
            if (v) c.set(key, *v);
        };
        put("graph.n", n);
        put("graph.p", p);
        put("data.v", v);
        put("data.d", d);
        put("run.q", q);
        put("run.T", T);
        put("run.variants", variant);
        put("privacy.theta", theta);
        put("privacy.epsilon", epsilon);
        put("privacy.delta", delta);
        put("privacy.mechanism", mechanism);
        put("run.seeds", seeds);
        put("run.jobs", jobs);
        return c;
    }
};

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& s : Config::split_list(text)) out.push_back(Config::to_double(key, s));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Random-walk SGD simulator and Gamma-mechanism privacy accountant"};
    app.require_subcommand(1);

    // generate-graph
    auto* gen = app.add_subcommand("generate-graph", "sample a connected Erdos-Renyi graph");
    std::size_t gen_n = 100;
    double gen_p = 0.3, gen_v = 10.0, gen_mu = 1.0;
    std::size_t gen_d = 5;
    std::uint64_t gen_seed = 1;
    std::string gen_out, gen_data_out;
    gen->add_option("--n", gen_n, "node count");
    gen->add_option("--p", gen_p, "edge probability");
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("--out", gen_out, "edge-list output file (stdout if omitted)");
    gen->add_option("--data-out", gen_data_out, "also write a synthetic dataset CSV");
    gen->add_option("--d", gen_d, "dataset feature dimension");
    gen->add_option("--v", gen_v, "dataset variance");
    gen->add_option("--mu", gen_mu, "dataset mean (broadcast)");

    // run
    auto* run = app.add_subcommand("run", "run an experiment and write trace/aggregate CSVs");
    Overrides run_ov;
    std::string run_out;
    run_ov.attach(run);
    run->add_option("--out", run_out, "output directory");

    // privacy-table
    auto* priv = app.add_subcommand("privacy-table", "(epsilon, theta) -> delta table for the Gamma mechanism");
    std::string eps_list = "0,0.5,1,2,3,4", theta_list = "0.2,0.5,1,2,5", delta_list, priv_out;
    double sup_l = 10.0, inf_l = 1.0;
    priv->add_option("--epsilons", eps_list, "comma-separated epsilons");
    priv->add_option("--thetas", theta_list, "comma-separated thetas");
    priv->add_option("--sup-l", sup_l, "largest Lipschitz constant");
    priv->add_option("--inf-l", inf_l, "smallest Lipschitz constant");
    priv->add_option("--deltas", delta_list, "target deltas to solve theta for");
    priv->add_option("--out", priv_out, "output directory (table to stdout if omitted)");

    // diagnostics
    auto* diag = app.add_subcommand("diagnostics", "chain and data constants (lambda_P, sigma^2, L)");
    Overrides diag_ov;
    std::string diag_out;
    diag_ov.attach(diag);
    diag->add_option("--out", diag_out, "output CSV file (stdout if omitted)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "repeat `run` over values of one parameter");
    Overrides sweep_ov;
    std::string sweep_param, sweep_values, sweep_out = "sweep";
    sweep_ov.attach(sweep);
    sweep->add_option("--param", sweep_param, "parameter key, e.g. data.v")->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--out", sweep_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*gen) {
        const Graph g = erdos_renyi(gen_n, gen_p, gen_seed);
        if (gen_out.empty()) {
            write_edge_list(std::cout, g);
        } else {
            std::ofstream out(gen_out);
            if (!out) throw ConfigError("cannot write '" + gen_out + "'");
            write_edge_list(out, g);
        }
        if (!gen_data_out.empty()) {
            const Dataset ds = generate_dataset(g.size(), gen_d, Vector::Constant(static_cast<Eigen::Index>(gen_d), gen_mu),
                                                gen_v, derive_seed(gen_seed, "data"));
            std::ofstream out(gen_data_out);
            if (!out) throw ConfigError("cannot write '" + gen_data_out + "'");
            write_dataset_csv(out, ds);
        }
        return 0;
    }
    if (*run) {
        Config c = run_ov.build();
        if (!run_out.empty()) c.set("output.dir", run_out);
        const ExperimentSpec spec = ExperimentSpec::from_config(c);
        const auto res = cmd_run(spec);
        for (const auto& vs : res.variants)
            std::cout << vs.label << " final mean gap " << res.final_mean_gap(vs.label) << '\n';
        return 0;
    }
    if (*priv) {
        const auto tbl = cmd_privacy_table(parse_doubles("--epsilons", eps_list),
                                           parse_doubles("--thetas", theta_list), sup_l, inf_l,
                                           delta_list.empty() ? std::vector<double>{}
                                                              : parse_doubles("--deltas", delta_list));
        if (priv_out.empty()) {
            write_privacy_table_csv(std::cout, tbl);
            if (!tbl.solved.empty()) {
                std::cout << '\n';
                write_theta_solve_csv(std::cout, tbl);
            }
        } else {
            std::filesystem::create_directories(priv_out);
            std::ofstream t(std::filesystem::path(priv_out) / "privacy_table.csv");
            std::ofstream s(std::filesystem::path(priv_out) / "theta_solve.csv");
            if (!t || !s) throw ConfigError("cannot write into '" + priv_out + "'");
            write_privacy_table_csv(t, tbl);
            write_theta_solve_csv(s, tbl);
        }
        return 0;
    }
    if (*diag) {
        const ExperimentSpec spec = ExperimentSpec::from_config(diag_ov.build());
        const auto rows = cmd_diagnostics(spec);
        if (diag_out.empty()) {
            write_diagnostics_csv(std::cout, spec, rows);
        } else {
            std::ofstream out(diag_out);
            if (!out) throw ConfigError("cannot write '" + diag_out + "'");
            write_diagnostics_csv(out, spec, rows);
        }
        return 0;
    }
    if (*sweep) {
        const auto rows = cmd_sweep(sweep_ov.build(), sweep_param, Config::split_list(sweep_values), sweep_out);
        for (const auto& r : rows)
            std::cout << sweep_param << '=' << r.value << ' ' << r.variant << " final mean gap "
                      << r.final_mean_gap << '\n';
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const rwsgd::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const rwsgd::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
