#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evoim/beliefs.hpp"
#include "evoim/config.hpp"
#include "evoim/diffusion.hpp"
#include "evoim/graph.hpp"
#include "evoim/growth.hpp"
#include "evoim/particles.hpp"
#include "evoim/rng.hpp"
#include "evoim/seed_selection.hpp"
#include "evoim/svg.hpp"

namespace evoim {

enum class Algorithm { EIM, ImmStatic, HighestDegree, Earliest };

inline std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::EIM: return "EIM";
        case Algorithm::ImmStatic: return "IMM";
        case Algorithm::HighestDegree: return "HD";
        case Algorithm::Earliest: return "Earliest";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "eim" || s == "EIM") return Algorithm::EIM;
    if (s == "imm" || s == "IMM" || s == "imm_static") return Algorithm::ImmStatic;
    if (s == "hd" || s == "HD") return Algorithm::HighestDegree;
    if (s == "earliest" || s == "Earliest") return Algorithm::Earliest;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct ExperimentConfig {
    int trials = 10;       // R
    int seed_budget = 10;  // K
    std::vector<int> k_sweep;
    uint64_t master_seed = 1;
    std::vector<Algorithm> roster = {Algorithm::EIM, Algorithm::HighestDegree, Algorithm::Earliest};

    std::string generator = "sn";  // sn | ba | file
    std::vector<int64_t> sn_schedule = {1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000, 1000};
    std::string graph_file;
    bool bidirected_ties = true;
    int initial_nodes = 10;  // ba seed size

    GrowthParams growth;          // ground-truth arrival process (ba generator)
    DiffusionParams diffusion;    // hidden weight process
    EvoNeParams evo_ne;           // particle filter
    BeliefParams beliefs;         // Kalman/UCB learner
    SamplerParams sampler;        // Evo-IMM accuracy knobs (K filled per run)

    std::string oracle = "none";  // none | exact | proxy
    int64_t mc_samples = 10000;
    bool wall_timings = false;    // include measured phase times in metrics.csv
    bool plots = false;
    bool assume_static = false;   // treat the network as non-growing: no growth learning

    std::vector<int> k_values() const {
        if (!k_sweep.empty()) return k_sweep;
        return {seed_budget};
    }
};

inline ExperimentConfig parse_experiment_config(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.trials = static_cast<int>(kv.get_int("trials", c.trials));
    c.seed_budget = static_cast<int>(kv.get_int("k", c.seed_budget));
    for (int64_t k : kv.get_int_list("k_sweep", {})) c.k_sweep.push_back(static_cast<int>(k));
    c.master_seed = static_cast<uint64_t>(kv.get_int("master_seed", 1));
    auto roster = kv.get_string_list("algorithms", {"eim", "hd", "earliest"});
    c.roster.clear();
    for (const auto& name : roster) c.roster.push_back(algorithm_from_string(name));

    c.generator = kv.get_string("generator", c.generator);
    c.sn_schedule = kv.get_int_list("sn_schedule", c.sn_schedule);
    c.graph_file = kv.get_string("graph_file", "");
    c.bidirected_ties = kv.get_bool("bidirected_ties", true);
    c.initial_nodes = static_cast<int>(kv.get_int("initial_nodes", c.initial_nodes));

    c.growth.beta = kv.get_double("beta", c.growth.beta);
    c.growth.theta = kv.get_double("theta", c.growth.theta);
    c.growth.capacity_N = kv.get_double("capacity", c.growth.capacity_N);
    c.growth.m = static_cast<int>(kv.get_int("m", c.growth.m));
    c.growth.t0 = kv.get_double("t0", c.growth.t0);

    c.diffusion.w0_mean = kv.get_double("w0_mean", c.diffusion.w0_mean);
    c.diffusion.w0_var = kv.get_double("w0_var", c.diffusion.w0_var);
    c.diffusion.k = kv.get_double("walk_k", c.diffusion.k);
    c.diffusion.frozen = kv.get_bool("frozen_weights", false);

    c.evo_ne.M = static_cast<int>(kv.get_int("particles", c.evo_ne.M));
    c.evo_ne.delta = kv.get_double("delta", c.evo_ne.delta);
    c.evo_ne.ranges.beta_lo = kv.get_double("beta_lo", c.evo_ne.ranges.beta_lo);
    c.evo_ne.ranges.beta_hi = kv.get_double("beta_hi", c.evo_ne.ranges.beta_hi);
    c.evo_ne.ranges.theta_lo = kv.get_double("theta_lo", c.evo_ne.ranges.theta_lo);
    c.evo_ne.ranges.theta_hi = kv.get_double("theta_hi", c.evo_ne.ranges.theta_hi);
    c.evo_ne.ranges.capacity_lo = kv.get_double("capacity_lo", c.evo_ne.ranges.capacity_lo);
    c.evo_ne.ranges.capacity_hi = kv.get_double("capacity_hi", c.evo_ne.ranges.capacity_hi);
    c.evo_ne.m = c.growth.m;
    c.evo_ne.t0 = c.growth.t0;

    c.beliefs.w0_mean = c.diffusion.w0_mean;
    c.beliefs.w0_var = c.diffusion.w0_var;
    c.beliefs.k = kv.get_double("belief_k", c.diffusion.k);
    c.beliefs.c = kv.get_double("ucb_c", 1.0);

    c.sampler.epsilon = kv.get_double("epsilon", 0.1);
    c.sampler.ell = kv.get_double("ell", 1.0);

    c.oracle = kv.get_string("oracle", "none");
    c.mc_samples = kv.get_int("mc_samples", c.mc_samples);
    c.wall_timings = kv.get_bool("wall_timings", false);
    c.plots = kv.get_bool("plots", false);
    c.assume_static = kv.get_bool("assume_static", false);

    if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (c.seed_budget < 1) throw std::invalid_argument("config: k must be >= 1");
    if (c.oracle != "none" && c.oracle != "exact" && c.oracle != "proxy")
        throw std::invalid_argument("config: oracle must be none, exact or proxy");
    if (c.generator != "sn" && c.generator != "ba" && c.generator != "file")
        throw std::invalid_argument("config: generator must be sn, ba or file");
    if (c.generator == "file" && c.graph_file.empty())
        throw std::invalid_argument("config: generator=file needs graph_file");
    return c;
}

// ---------------------------------------------------------------------------
// World trajectory. Growth and the hidden weight walk do not depend on which
// seeds are chosen, so one realization is shared by every algorithm in the
// roster; this couples their comparisons trial by trial.

struct WorldTrajectory {
    EvolvingGraph graph;
    std::vector<std::vector<double>> weights_at;  // [r]: weights in force for trial r's cascade
    std::vector<int64_t> population;              // node count at each boundary
};

inline EvolvingGraph build_ba_seed(int n0, int m, Rng& rng, bool bidirected = true) {
    EvolvingGraph g;
    g.add_node(0);
    g.add_node(0);
    g.add_edge(0, 1, 0, bidirected);
    std::vector<NodeId> stubs = {0, 1};
    for (NodeId v = 2; v < n0; ++v) {
        g.add_node(0);
        std::vector<NodeId> used;
        int picks = std::min<int>(m, v);
        for (int j = 0; j < picks; ++j) {
            NodeId t = detail::draw_pa_target(stubs, v, used, g.node_count(), rng);
            if (t < 0) break;
            used.push_back(t);
            g.add_edge(v, t, 0, bidirected);
            stubs.push_back(v);
            stubs.push_back(t);
        }
    }
    return g;
}

inline WorldTrajectory build_world(const ExperimentConfig& cfg, uint64_t master_seed) {
    WorldTrajectory w;
    int R = cfg.trials;

    if (cfg.generator == "sn") {
        std::vector<int64_t> schedule(cfg.sn_schedule);
        schedule.resize(R, 0);
        Rng rng = make_stream(master_seed, "generate");
        w.graph = generate_sn_network(schedule, rng);
    } else if (cfg.generator == "ba") {
        cfg.growth.validate();
        Rng seed_rng = make_stream(master_seed, "generate");
        w.graph = build_ba_seed(std::max(2, cfg.initial_nodes), cfg.growth.m, seed_rng, cfg.bidirected_ties);
        GrowthState state{cfg.growth.t0, static_cast<double>(w.graph.node_count()),
                          w.graph.node_count()};
        for (Trial r = 1; r <= R; ++r) {
            Rng rng = make_stream(master_seed, "growth", r);
            grow_one_trial(w.graph, cfg.growth, state, r, rng, cfg.bidirected_ties);
        }
    } else {
        std::ifstream in(cfg.graph_file);
        if (!in) throw std::runtime_error("cannot open graph file: " + cfg.graph_file);
        auto report = ingest_temporal_csv(in, w.graph, identity_bucket);
        if (!report.rejected.empty())
            throw std::runtime_error("graph file has " + std::to_string(report.rejected.size()) +
                                     " rejected rows; first at line " +
                                     std::to_string(report.rejected.front().first));
        if (w.graph.max_trial() < R)
            throw std::runtime_error("graph file covers fewer trials than requested");
    }
    w.graph.advance_to_trial(std::max(w.graph.max_trial(), static_cast<Trial>(R)));

    // Hidden weights: fresh edges draw their initial value in the trial they
    // appear; older edges take one walk step per trial.
    TruthTable truth;
    w.weights_at.resize(R + 1);
    w.population.resize(R + 1);
    for (Trial r = 0; r <= R; ++r) {
        GraphSnapshot snap = w.graph.snapshot(r);
        Rng rng = make_stream(master_seed, "truth", r);
        for (EdgeId e = static_cast<EdgeId>(truth.size()); e < snap.edge_count(); ++e)
            truth.register_edge(e, w.graph.edge(e).establish_trial, cfg.diffusion, rng);
        if (r > 0) truth.step(r, cfg.diffusion, rng);
        w.weights_at[r] = truth.weights();
        w.population[r] = snap.node_count();
    }
    return w;
}

// ---------------------------------------------------------------------------

struct TrialMetrics {
    Trial trial = 0;
    std::string algorithm;
    int64_t influenced = 0;
    double rel_error = std::numeric_limits<double>::quiet_NaN();
    double weight_mae = std::numeric_limits<double>::quiet_NaN();
    double regret = std::numeric_limits<double>::quiet_NaN();
    double ms_evo_ne = 0, ms_evo_il = 0, ms_evo_imm = 0;
};

struct RegretSeries {
    std::vector<double> cumulative;
    int skipped = 0;
};

// B_R = sum_r (oracle_r - achieved_r / beta). NaN oracle entries are skipped
// and counted.
inline RegretSeries scaled_regret(const std::vector<double>& oracle, const std::vector<double>& achieved,
                                  double beta_ratio) {
    if (beta_ratio <= 0 || beta_ratio > 1) throw std::invalid_argument("scaled_regret: beta must be in (0,1]");
    if (oracle.size() != achieved.size()) throw std::invalid_argument("scaled_regret: misaligned series");
    RegretSeries out;
    double cum = 0;
    for (size_t r = 0; r < oracle.size(); ++r) {
        if (std::isnan(oracle[r])) {
            out.skipped++;
        } else {
            cum += oracle[r] - achieved[r] / beta_ratio;
        }
        out.cumulative.push_back(cum);
    }
    return out;
}

inline double approx_ratio(double epsilon, double ell, int64_t n) {
    return (1.0 - 1.0 / kEuler - epsilon) * (1.0 - std::pow(static_cast<double>(n), -ell));
}

struct ExperimentResult {
    std::vector<TrialMetrics> metrics;
    std::string summary;
    std::vector<SvgSeries> influence_series;  // per algorithm
    std::vector<SvgSeries> rel_error_series;
};

namespace detail {

struct AlgoState {
    Algorithm kind;
    BeliefTable beliefs;
    std::optional<EvoNeFilter> filter;
    std::optional<TrialFeedback> last_feedback;
    int64_t cumulative_influenced = 0;
    double cumulative_regret = 0;
    double total_ms_ne = 0, total_ms_il = 0, total_ms_imm = 0;
};

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Runs the full trial loop for one K. Order within a trial: learn growth from
// the previous feedback, learn weights from the previous feedback, select
// seeds on the known graph, then the world advances and one cascade per
// algorithm produces the next feedback.
inline ExperimentResult run_experiment_single(const ExperimentConfig& cfg, int K) {
    ExperimentResult result;
    WorldTrajectory world = build_world(cfg, cfg.master_seed);
    int R = cfg.trials;

    SamplerParams sampler = cfg.sampler;
    sampler.K = K;

    std::vector<detail::AlgoState> states;
    for (Algorithm a : cfg.roster) {
        detail::AlgoState st;
        st.kind = a;
        st.beliefs = BeliefTable(cfg.beliefs);
        states.push_back(std::move(st));
    }

    std::vector<SvgSeries> influenced_series(states.size()), rel_series(states.size());
    for (size_t i = 0; i < states.size(); ++i) {
        influenced_series[i].name = algorithm_name(states[i].kind);
        rel_series[i].name = algorithm_name(states[i].kind);
    }

    for (Trial r = 1; r <= R; ++r) {
        GraphSnapshot known = world.graph.snapshot(r - 1);
        GraphSnapshot next = world.graph.snapshot(r);
        double beta_ratio = approx_ratio(sampler.epsilon, sampler.ell, known.node_count());

        // Oracle weights: what was in force when seeds were chosen (new edges
        // enter at their initial draw).
        std::vector<double> oracle_w;
        std::optional<OptResult> oracle_opt;
        InfluenceProblem oracle_ip;
        ErrSetCollection proxy_R;
        IntermediateGraph proxy_ig;
        if (cfg.oracle != "none") {
            oracle_w = world.weights_at[r];
            for (size_t e = 0; e < world.weights_at[r - 1].size(); ++e) oracle_w[e] = world.weights_at[r - 1][e];
            oracle_ip = make_influence_problem(next, oracle_w);
            if (cfg.oracle == "exact") {
                oracle_opt = brute_force_opt(oracle_ip, K);
            } else {
                proxy_ig.snap = &next;
                proxy_ig.node_weight.assign(next.node_count(), 1.0);
                proxy_ig.n_prime = next.node_count();
                proxy_ig.edge_prob = oracle_w;
                Rng orng = make_stream(cfg.master_seed, "oracle", r);
                proxy_R = sample_err_sets(proxy_ig, sampler, orng);
                OptResult o;
                o.seeds = greedy_node_selection(proxy_R, K, proxy_ig);
                o.value = estimate_influence(proxy_R, proxy_ig.n_prime, o.seeds, next.node_count());
                oracle_opt = o;
            }
        }

        for (size_t i = 0; i < states.size(); ++i) {
            auto& st = states[i];
            TrialMetrics tm;
            tm.trial = r;
            tm.algorithm = algorithm_name(st.kind);

            // (1) growth learning
            auto t0 = std::chrono::steady_clock::now();
            std::vector<double> predicted;
            if (st.kind == Algorithm::EIM && !cfg.assume_static) {
                Rng ne_rng = make_stream(cfg.master_seed, "evo-ne/" + tm.algorithm, r);
                if (!st.filter) {
                    EvoNeParams np = cfg.evo_ne;
                    np.m = cfg.growth.m;
                    np.t0 = cfg.growth.t0;
                    st.filter.emplace(np, known, ne_rng);
                }
                const TrialFeedback* fb = st.last_feedback ? &*st.last_feedback : nullptr;
                EvoNeStep ne = st.filter->step(fb, known, ne_rng);
                predicted = std::move(ne.predicted_delta);
                // learned-speed accuracy: predicted end-of-trial population
                // against the realized one
                double pop = static_cast<double>(next.node_count());
                tm.rel_error = std::abs(st.filter->mean_population() - pop) / pop;
            }
            tm.ms_evo_ne = detail::ms_since(t0);

            // (2) influence learning
            t0 = std::chrono::steady_clock::now();
            if (st.last_feedback) st.beliefs.process_feedback(*st.last_feedback, world.graph, r);
            tm.ms_evo_il = detail::ms_since(t0);

            // (3) seed selection over the known graph
            t0 = std::chrono::steady_clock::now();
            std::vector<NodeId> seeds;
            switch (st.kind) {
                case Algorithm::EIM: {
                    predicted.resize(known.node_count(), 0.0);
                    IntermediateGraph ig = build_intermediate(known, predicted, st.beliefs);
                    Rng srng = make_stream(cfg.master_seed, "evo-imm", r);
                    auto R_sets = sample_err_sets(ig, sampler, srng);
                    seeds = greedy_node_selection(R_sets, std::min<int>(K, known.node_count()), ig);
                    break;
                }
                case Algorithm::ImmStatic: {
                    Rng srng = make_stream(cfg.master_seed, "evo-imm", r);
                    seeds = baseline_select(BaselineKind::ImmStatic, known, st.beliefs, sampler, srng);
                    break;
                }
                case Algorithm::HighestDegree: {
                    Rng srng = make_stream(cfg.master_seed, "baseline", r);
                    seeds = baseline_select(BaselineKind::HighestDegree, known, st.beliefs, sampler, srng);
                    break;
                }
                case Algorithm::Earliest: {
                    Rng srng = make_stream(cfg.master_seed, "baseline", r);
                    seeds = baseline_select(BaselineKind::Earliest, known, st.beliefs, sampler, srng);
                    break;
                }
            }
            tm.ms_evo_imm = detail::ms_since(t0);

            // (4)-(5) world already advanced; run this algorithm's cascade.
            // The coin stream depends only on (master seed, trial), so every
            // algorithm faces the same live-edge world.
            Rng crng = make_stream(cfg.master_seed, "cascade", r);
            TrialFeedback fb = run_cascade(next, seeds, world.weights_at[r], crng, r);
            tm.influenced = static_cast<int64_t>(fb.influenced.size());
            st.cumulative_influenced += tm.influenced;

            double mae_sum = 0;
            int64_t mae_n = 0;
            for (const auto& [e, z] : fb.edge_outcomes) {
                double est = st.beliefs.known(e) ? st.beliefs.belief(e).mean : cfg.beliefs.w0_mean;
                mae_sum += std::abs(est - world.weights_at[r][e]);
                mae_n++;
            }
            if (mae_n > 0) tm.weight_mae = mae_sum / static_cast<double>(mae_n);

            if (oracle_opt) {
                double achieved;
                if (cfg.oracle == "exact") {
                    achieved = exact_influence(oracle_ip, seeds);
                } else {
                    achieved = estimate_influence(proxy_R, proxy_ig.n_prime, seeds, next.node_count());
                }
                st.cumulative_regret += oracle_opt->value - achieved / beta_ratio;
                tm.regret = st.cumulative_regret;
            }

            st.last_feedback = std::move(fb);
            st.total_ms_ne += tm.ms_evo_ne;
            st.total_ms_il += tm.ms_evo_il;
            st.total_ms_imm += tm.ms_evo_imm;

            influenced_series[i].values.push_back(static_cast<double>(tm.influenced));
            if (st.kind == Algorithm::EIM) rel_series[i].values.push_back(tm.rel_error);

            result.metrics.push_back(std::move(tm));
        }
    }

    std::ostringstream sum;
    sum << "== K=" << K << " R=" << R << " seed=" << cfg.master_seed << " generator=" << cfg.generator
        << " ==\n";
    sum << "final graph: " << world.graph.node_count() << " nodes, " << world.graph.tie_count()
        << " ties (" << world.graph.edge_count() << " directed records)\n";
    for (auto& st : states) {
        sum << "  " << std::left << std::setw(9) << algorithm_name(st.kind)
            << " cumulative influenced: " << std::setw(10) << st.cumulative_influenced;
        if (cfg.oracle != "none")
            sum << " cumulative scaled regret (" << cfg.oracle << " oracle): " << st.cumulative_regret;
        sum << "\n";
    }
    for (size_t i = 0; i < states.size(); ++i) {
        if (states[i].kind != Algorithm::EIM) continue;
        sum << "  EIM particle relative error by trial:";
        for (double v : rel_series[i].values) sum << " " << std::setprecision(4) << v;
        sum << "\n";
    }
    sum << "  wall time ms (ne/il/imm, measured, not reproducible):";
    for (auto& st : states)
        sum << " " << algorithm_name(st.kind) << "=" << std::fixed << std::setprecision(1) << st.total_ms_ne
            << "/" << st.total_ms_il << "/" << st.total_ms_imm;
    sum << "\n" << std::defaultfloat;
    result.summary = sum.str();
    result.influence_series = std::move(influenced_series);
    for (auto& s : rel_series)
        if (!s.values.empty()) result.rel_error_series.push_back(std::move(s));
    return result;
}

inline void write_metrics_csv(const std::vector<TrialMetrics>& metrics, bool wall_timings, std::ostream& out) {
    out << "trial,algorithm,influenced,rel_error,weight_mae,regret,ms_evo_ne,ms_evo_il,ms_evo_imm\n";
    auto cell = [&](double v) {
        if (std::isnan(v)) return std::string();
        std::ostringstream ss;
        ss << std::setprecision(10) << v;
        return ss.str();
    };
    for (const auto& m : metrics) {
        out << m.trial << "," << m.algorithm << "," << m.influenced << "," << cell(m.rel_error) << ","
            << cell(m.weight_mae) << "," << cell(m.regret) << ",";
        if (wall_timings) {
            out << cell(m.ms_evo_ne) << "," << cell(m.ms_evo_il) << "," << cell(m.ms_evo_imm) << "\n";
        } else {
            out << "0,0,0\n";
        }
    }
}

}  // namespace evoim
