#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evoim/graph.hpp"
#include "evoim/rng.hpp"

namespace evoim {

struct DiffusionParams {
    double w0_mean = 0.05;  // mean of a fresh edge weight
    double w0_var = 0.008;  // variance of a fresh edge weight; also the walk's base variance
    double k = 2.0;         // walk variance decay exponent
    bool frozen = false;    // freeze weights after their initial draw

    void validate() const {
        if (w0_var <= 0) throw std::invalid_argument("diffusion: w0_var must be positive");
        if (k <= 0) throw std::invalid_argument("diffusion: k must be positive");
    }
};

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Variance added by the random walk in trial r for an edge born in trial r0.
inline double walk_variance(Trial r, Trial born, double k, double sigma0) {
    if (r <= born) return 0.0;
    return sigma0 / std::pow(static_cast<double>(r - born), k);
}

// Hidden activation probabilities. Edge e born in trial b draws
// w ~ N(w0_mean, w0_var) clamped to [0,1]; in each later trial r the weight
// takes a Gaussian step of variance w0_var / (r-b)^k and is clamped again.
class TruthTable {
public:
    void register_edge(EdgeId e, Trial born, const DiffusionParams& p, Rng& rng) {
        if (e != static_cast<EdgeId>(w_.size()))
            throw std::invalid_argument("truth: edges must be registered in id order");
        w_.push_back(clamp01(normal(rng, p.w0_mean, std::sqrt(p.w0_var))));
        born_.push_back(born);
    }

    void register_edges(const EvolvingGraph& g, const std::vector<EdgeId>& ids, Trial born,
                        const DiffusionParams& p, Rng& rng) {
        (void)g;
        for (EdgeId e : ids) register_edge(e, born, p, rng);
    }

    // One walk step for every edge born before trial r.
    void step(Trial r, const DiffusionParams& p, Rng& rng) {
        if (p.frozen) return;
        for (size_t e = 0; e < w_.size(); ++e) {
            double dvar = walk_variance(r, born_[e], p.k, p.w0_var);
            if (dvar <= 0) continue;
            w_[e] = clamp01(w_[e] + normal(rng, 0.0, std::sqrt(dvar)));
        }
    }

    double weight(EdgeId e) const { return w_.at(e); }
    Trial born(EdgeId e) const { return born_.at(e); }
    size_t size() const { return w_.size(); }
    const std::vector<double>& weights() const { return w_; }

private:
    std::vector<double> w_;
    std::vector<Trial> born_;
};

// ---------------------------------------------------------------------------
// Independent-cascade simulation with edge-level feedback.

struct TrialFeedback {
    Trial trial = 0;
    std::vector<NodeId> influenced;                          // sorted
    std::vector<std::pair<EdgeId, uint8_t>> edge_outcomes;   // sorted by edge id
    std::vector<std::pair<NodeId, int32_t>> degree_observations;  // sorted by node id
};

// Runs one cascade on `snap`. Every edge of the snapshot gets its coin drawn
// up front (edge-id order), which keeps the rng stream independent of the seed
// set and makes coupled-seed comparisons exact: a superset of seeds sees a
// superset of influenced nodes under the same stream.
inline TrialFeedback run_cascade(const GraphSnapshot& snap, const std::vector<NodeId>& seeds,
                                 const std::vector<double>& edge_weight, Rng& rng, Trial trial = 0) {
    for (NodeId s : seeds)
        if (!snap.contains_node(s)) throw std::invalid_argument("run_cascade: seed not in snapshot");
    if (edge_weight.size() < static_cast<size_t>(snap.edge_count()))
        throw std::invalid_argument("run_cascade: weight vector shorter than edge set");

    std::vector<uint8_t> coin(snap.edge_count());
    for (EdgeId e = 0; e < snap.edge_count(); ++e) coin[e] = u01(rng) < edge_weight[e] ? 1 : 0;

    std::vector<uint8_t> hit(snap.node_count(), 0);
    std::deque<NodeId> frontier;
    for (NodeId s : seeds) {
        if (!hit[s]) {
            hit[s] = 1;
            frontier.push_back(s);
        }
    }

    TrialFeedback fb;
    fb.trial = trial;
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        snap.for_each_out(u, [&](const EdgeRecord& e) {
            fb.edge_outcomes.emplace_back(e.id, coin[e.id]);
            if (coin[e.id] && !hit[e.dst]) {
                hit[e.dst] = 1;
                frontier.push_back(e.dst);
            }
        });
    }

    std::vector<uint8_t> observed(snap.node_count(), 0);
    for (NodeId v = 0; v < snap.node_count(); ++v) {
        if (!hit[v]) continue;
        fb.influenced.push_back(v);
        observed[v] = 1;
    }
    // Degrees of influenced nodes and their social neighbors are observable.
    for (NodeId v : fb.influenced) {
        snap.for_each_out(v, [&](const EdgeRecord& e) { observed[e.dst] = 1; });
        snap.for_each_in(v, [&](const EdgeRecord& e) { observed[e.src] = 1; });
    }
    for (NodeId v = 0; v < snap.node_count(); ++v)
        if (observed[v]) fb.degree_observations.emplace_back(v, snap.degree(v));

    std::sort(fb.edge_outcomes.begin(), fb.edge_outcomes.end());
    return fb;
}

// ---------------------------------------------------------------------------
// Expected-influence oracles over a fixed probabilistic graph.

struct InfluenceProblem {
    NodeId n = 0;
    std::vector<std::pair<NodeId, NodeId>> edges;  // directed
    std::vector<double> prob;                      // per edge
    std::vector<double> node_weight;               // empty means all 1

    double weight_of(NodeId v) const { return node_weight.empty() ? 1.0 : node_weight[v]; }
};

inline InfluenceProblem make_influence_problem(const GraphSnapshot& snap, const std::vector<double>& edge_weight) {
    if (edge_weight.size() < static_cast<size_t>(snap.edge_count()))
        throw std::invalid_argument("make_influence_problem: weight vector shorter than edge set");
    InfluenceProblem ip;
    ip.n = snap.node_count();
    ip.edges.reserve(snap.edge_count());
    ip.prob.reserve(snap.edge_count());
    for (EdgeId e = 0; e < snap.edge_count(); ++e) {
        const auto& rec = snap.edge(e);
        ip.edges.emplace_back(rec.src, rec.dst);
        ip.prob.push_back(edge_weight[e]);
    }
    return ip;
}

inline TrialFeedback run_cascade(const GraphSnapshot& snap, const std::vector<NodeId>& seeds,
                                 const TruthTable& truth, Rng& rng, Trial trial = 0) {
    return run_cascade(snap, seeds, truth.weights(), rng, trial);
}

namespace detail {

inline uint32_t closure_mask(const InfluenceProblem& ip, uint32_t seeds_mask, uint32_t live_edges) {
    uint32_t reach = seeds_mask;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t e = 0; e < ip.edges.size(); ++e) {
            if (!(live_edges & (1u << e))) continue;
            uint32_t s = 1u << ip.edges[e].first, d = 1u << ip.edges[e].second;
            if ((reach & s) && !(reach & d)) {
                reach |= d;
                changed = true;
            }
        }
    }
    return reach;
}

inline double mask_weight(const InfluenceProblem& ip, uint32_t mask) {
    double w = 0;
    for (NodeId v = 0; v < ip.n; ++v)
        if (mask & (1u << v)) w += ip.weight_of(v);
    return w;
}

}  // namespace detail

constexpr int kExactEdgeLimit = 20;

// Exact expected (weighted) influence by enumerating all 2^|E| edge worlds.
inline double exact_influence(const InfluenceProblem& ip, const std::vector<NodeId>& seeds) {
    if (ip.n > 31) throw std::invalid_argument("exact_influence: too many nodes");
    if (ip.edges.size() > kExactEdgeLimit) throw std::invalid_argument("exact_influence: too many edges");
    uint32_t seed_mask = 0;
    for (NodeId s : seeds) seed_mask |= 1u << s;
    double total = 0;
    uint32_t worlds = 1u << ip.edges.size();
    for (uint32_t w = 0; w < worlds; ++w) {
        double pw = 1.0;
        for (size_t e = 0; e < ip.edges.size(); ++e)
            pw *= (w & (1u << e)) ? ip.prob[e] : 1.0 - ip.prob[e];
        if (pw == 0.0) continue;
        total += pw * detail::mask_weight(ip, detail::closure_mask(ip, seed_mask, w));
    }
    return total;
}

struct McEstimate {
    double mean = 0;
    double half_width = 0;  // 95% normal interval
};

// Monte-Carlo fallback when the world enumeration is out of reach.
inline McEstimate mc_influence(const InfluenceProblem& ip, const std::vector<NodeId>& seeds,
                               int64_t samples, Rng& rng) {
    if (samples < 2) throw std::invalid_argument("mc_influence: need at least 2 samples");
    std::vector<std::vector<std::pair<NodeId, size_t>>> out(ip.n);
    for (size_t e = 0; e < ip.edges.size(); ++e) out[ip.edges[e].first].emplace_back(ip.edges[e].second, e);

    double sum = 0, sumsq = 0;
    std::vector<uint8_t> hit(ip.n);
    std::vector<NodeId> stack;
    for (int64_t it = 0; it < samples; ++it) {
        std::fill(hit.begin(), hit.end(), 0);
        stack.assign(seeds.begin(), seeds.end());
        double w = 0;
        for (NodeId s : seeds)
            if (!hit[s]) {
                hit[s] = 1;
                w += ip.weight_of(s);
            }
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            for (auto [v, e] : out[u]) {
                if (!hit[v] && u01(rng) < ip.prob[e]) {
                    hit[v] = 1;
                    w += ip.weight_of(v);
                    stack.push_back(v);
                }
            }
        }
        sum += w;
        sumsq += w * w;
    }
    McEstimate est;
    est.mean = sum / samples;
    double var = std::max(0.0, (sumsq - sum * sum / samples) / (samples - 1));
    est.half_width = 1.96 * std::sqrt(var / samples);
    return est;
}

}  // namespace evoim
