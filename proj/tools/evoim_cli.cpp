// Command line front end: synthetic network generation, experiment runs,
// brute-force oracles for tiny instances, and the seed-selection scaling
// sweep.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evoim/harness.hpp"

namespace fs = std::filesystem;
using namespace evoim;

namespace {

int cmd_generate(const std::string& kind, const std::string& schedule_str, uint64_t seed,
                 const std::string& out_path, double beta, double theta, double capacity, int m,
                 int initial_nodes, int trials) {
    Rng rng = make_stream(seed, "generate");
    EvolvingGraph g;
    if (kind == "sn") {
        std::stringstream helper("schedule = " + schedule_str);
        auto schedule = KeyValueConfig::parse(helper).get_int_list("schedule", {});
        if (schedule.empty()) {
            std::cerr << "generate: empty schedule\n";
            return 1;
        }
        g = generate_sn_network(schedule, rng);
    } else if (kind == "ba") {
        GrowthParams p;
        p.beta = beta;
        p.theta = theta;
        p.capacity_N = capacity;
        p.m = m;
        g = build_ba_seed(initial_nodes, m, rng);
        GrowthState state{p.t0, static_cast<double>(g.node_count()), g.node_count()};
        for (Trial r = 1; r <= trials; ++r) grow_one_trial(g, p, state, r, rng, true);
    } else {
        std::cerr << "generate: kind must be sn or ba\n";
        return 1;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "generate: cannot open " << out_path << "\n";
        return 1;
    }
    export_temporal_csv(g, out);
    std::cout << "wrote " << g.node_count() << " nodes, " << g.edge_count() << " directed edges ("
              << g.tie_count() << " ties) to " << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "run: cannot open config " << config_path << "\n";
        return 1;
    }
    ExperimentConfig cfg;
    try {
        cfg = parse_experiment_config(KeyValueConfig::parse(in));
    } catch (const std::exception& e) {
        std::cerr << "run: config error: " << e.what() << "\n";
        return 1;
    }

    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "summary.txt");
    auto k_values = cfg.k_values();
    for (int K : k_values) {
        ExperimentResult res = run_experiment_single(cfg, K);
        std::string metrics_name =
            k_values.size() == 1 ? "metrics.csv" : ("metrics_k" + std::to_string(K) + ".csv");
        std::ofstream metrics(fs::path(out_dir) / metrics_name);
        write_metrics_csv(res.metrics, cfg.wall_timings, metrics);
        summary << res.summary;
        if (cfg.plots) {
            std::ofstream f1(fs::path(out_dir) / ("influenced_k" + std::to_string(K) + ".svg"));
            write_line_chart(f1, "influenced size per trial (K=" + std::to_string(K) + ")",
                             res.influence_series);
            if (!res.rel_error_series.empty()) {
                std::ofstream f2(fs::path(out_dir) / ("rel_error_k" + std::to_string(K) + ".svg"));
                write_line_chart(f2, "particle relative error (K=" + std::to_string(K) + ")",
                                 res.rel_error_series);
            }
        }
        std::cout << res.summary;
    }
    std::cout << "outputs written to " << out_dir << "\n";
    return 0;
}

int cmd_oracle(const std::string& graph_path, int K, double prob) {
    std::ifstream in(graph_path);
    if (!in) {
        std::cerr << "oracle: cannot open " << graph_path << "\n";
        return 1;
    }
    EvolvingGraph g;
    auto report = ingest_temporal_csv(in, g, identity_bucket);
    if (!report.rejected.empty()) {
        std::cerr << "oracle: " << report.rejected.size() << " rejected rows (first at line "
                  << report.rejected.front().first << ": " << report.rejected.front().second << ")\n";
        return 1;
    }
    GraphSnapshot snap = g.snapshot(g.max_trial());
    std::vector<double> w(snap.edge_count(), prob);
    InfluenceProblem ip = make_influence_problem(snap, w);
    try {
        OptResult opt = brute_force_opt(ip, K);
        std::cout << "optimal seeds (K=" << K << ", p=" << prob << "):";
        for (NodeId v : opt.seeds) std::cout << " " << v;
        std::cout << "\nexpected influence: " << opt.value << "\n";
    } catch (const std::exception& e) {
        std::cerr << "oracle: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_bench(const std::string& sizes_str, int K, double epsilon, uint64_t seed) {
    std::stringstream helper("sizes = " + sizes_str);
    auto sizes = KeyValueConfig::parse(helper).get_int_list("sizes", {10000, 30000, 100000});
    BeliefTable beliefs;  // untouched: every edge at the initial UCB value
    SamplerParams sp;
    sp.K = K;
    sp.epsilon = epsilon;

    std::vector<double> log_size, log_ms;
    std::cout << "size,nodes,edges,err_sets,ms\n";
    for (int64_t n : sizes) {
        Rng grng = make_stream(seed, "bench-gen", static_cast<uint64_t>(n));
        EvolvingGraph g = generate_sn_network({n - 2}, grng);
        GraphSnapshot snap = g.snapshot(1);
        std::vector<double> zero(snap.node_count(), 0.0);
        IntermediateGraph ig = build_intermediate(snap, zero, beliefs);
        Rng srng = make_stream(seed, "bench-run", static_cast<uint64_t>(n));
        auto t0 = std::chrono::steady_clock::now();
        auto R = sample_err_sets(ig, sp, srng);
        auto seeds = greedy_node_selection(R, K, ig);
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        (void)seeds;
        int64_t work = snap.node_count() + snap.edge_count();
        std::cout << n << "," << snap.node_count() << "," << snap.edge_count() << "," << R.sets.size() << ","
                  << ms << "\n";
        log_size.push_back(std::log(static_cast<double>(work)));
        log_ms.push_back(std::log(std::max(ms, 1e-3)));
    }
    if (log_size.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < log_size.size(); ++i) {
            mx += log_size[i];
            my += log_ms[i];
        }
        mx /= log_size.size();
        my /= log_size.size();
        double num = 0, den = 0;
        for (size_t i = 0; i < log_size.size(); ++i) {
            num += (log_size[i] - mx) * (log_ms[i] - my);
            den += (log_size[i] - mx) * (log_size[i] - mx);
        }
        std::cout << "log-log slope: " << num / den << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"evolving influence maximization engine"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "emit a synthetic temporal edge list (CSV)");
    std::string gen_kind = "sn", gen_schedule = "1000x10", gen_out = "network.csv";
    uint64_t gen_seed = 1;
    double gen_beta = 1e-3, gen_theta = 0.0, gen_capacity = 1e4;
    int gen_m = 1, gen_initial = 10, gen_trials = 10;
    gen->add_option("--kind", gen_kind, "sn | ba");
    gen->add_option("--schedule", gen_schedule, "per-trial node counts, e.g. 2000x10 or 100,200,400");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output path");
    gen->add_option("--beta", gen_beta, "ba: arrival rate coefficient");
    gen->add_option("--theta", gen_theta, "ba: decay exponent");
    gen->add_option("--capacity", gen_capacity, "ba: total population N");
    gen->add_option("--m", gen_m, "ba: edges per new node");
    gen->add_option("--initial-nodes", gen_initial, "ba: seed graph size");
    gen->add_option("--trials", gen_trials, "ba: number of growth trials");

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string run_config, run_out = "out";
    run->add_option("--config", run_config, "key = value config file")->required();
    run->add_option("--out-dir", run_out, "output directory");

    auto* oracle = app.add_subcommand("oracle", "brute-force optimal seeds on a tiny instance");
    std::string oracle_graph;
    int oracle_k = 1;
    double oracle_prob = 0.1;
    oracle->add_option("--graph", oracle_graph, "temporal CSV")->required();
    oracle->add_option("--k", oracle_k, "seed budget");
    oracle->add_option("--prob", oracle_prob, "uniform activation probability");

    auto* bench = app.add_subcommand("bench", "seed-selection scaling sweep");
    std::string bench_sizes = "10000,30000,100000";
    int bench_k = 10;
    double bench_eps = 0.5;
    uint64_t bench_seed = 1;
    bench->add_option("--sizes", bench_sizes, "node counts, comma separated");
    bench->add_option("--k", bench_k, "seed budget");
    bench->add_option("--epsilon", bench_eps, "sampler accuracy");
    bench->add_option("--seed", bench_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed())
        return cmd_generate(gen_kind, gen_schedule, gen_seed, gen_out, gen_beta, gen_theta, gen_capacity,
                            gen_m, gen_initial, gen_trials);
    if (run->parsed()) return cmd_run(run_config, run_out);
    if (oracle->parsed()) return cmd_oracle(oracle_graph, oracle_k, oracle_prob);
    if (bench->parsed()) return cmd_bench(bench_sizes, bench_k, bench_eps, bench_seed);
    return 1;
}
