#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evoim/graph.hpp"
#include "evoim/rng.hpp"

namespace evoim {

// Node-arrival model: dn/dt = (beta / t^theta) * n * (N - n). One trial spans
// one unit of t; the clock starts at t0 > 0 because the rate is singular at
// t = 0 when theta > 0.
struct GrowthParams {
    double beta = 1e-3;
    double theta = 0.0;
    double capacity_N = 1e4;
    int m = 1;      // edges per new node
    double t0 = 1.0;

    void validate() const {
        if (beta < 0) throw std::invalid_argument("growth: beta must be >= 0");
        if (theta < 0) throw std::invalid_argument("growth: theta must be >= 0");
        if (capacity_N <= 1) throw std::invalid_argument("growth: capacity must exceed 1");
        if (m < 1) throw std::invalid_argument("growth: m must be >= 1");
        if (t0 <= 0) throw std::invalid_argument("growth: t0 must be positive");
    }
};

struct GrowthState {
    double t = 1.0;
    double n = 1.0;
    int64_t realized = 1;  // floor(n) at the last emission point
};

inline double logistic_population(const GrowthParams& p, double n0, double t_elapsed) {
    // theta = 0 closed form: n(t) = N / (1 + ((N - n0)/n0) e^{-beta N t})
    double ratio = (p.capacity_N - n0) / n0;
    return p.capacity_N / (1.0 + ratio * std::exp(-p.beta * p.capacity_N * t_elapsed));
}

// Classical fixed-step RK4 on the arrival ODE.
inline GrowthState integrate_growth_rk4(const GrowthParams& p, GrowthState state, double dt, int steps = 1024) {
    if (dt <= 0) throw std::invalid_argument("integrate_growth: dt must be positive");
    if (state.t <= 0) state.t = p.t0;
    auto deriv = [&](double t, double n) {
        if (n >= p.capacity_N) return 0.0;
        return p.beta / std::pow(t, p.theta) * n * (p.capacity_N - n);
    };
    double h = dt / steps;
    double t = state.t, n = state.n;
    for (int i = 0; i < steps; ++i) {
        double k1 = deriv(t, n);
        double k2 = deriv(t + h / 2, n + h / 2 * k1);
        double k3 = deriv(t + h / 2, n + h / 2 * k2);
        double k4 = deriv(t + h, n + h * k3);
        double next = n + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        n = std::min(p.capacity_N, std::max(n, next));  // monotone, capped at N
        t += h;
    }
    state.t = state.t + dt;
    state.n = n;
    return state;
}

inline GrowthState integrate_growth(const GrowthParams& p, GrowthState state, double dt, int steps = 1024) {
    if (dt <= 0) throw std::invalid_argument("integrate_growth: dt must be positive");
    if (state.n >= p.capacity_N || p.beta == 0.0) {
        state.t += dt;
        return state;
    }
    if (p.theta == 0.0) {
        if (state.t <= 0) state.t = p.t0;
        state.n = std::min(p.capacity_N, logistic_population(p, state.n, dt));
        state.t += dt;
        return state;
    }
    return integrate_growth_rk4(p, state, dt, steps);
}

// ---------------------------------------------------------------------------
// Expected-degree propagation under preferential attachment.
//
// A node of degree d, in a graph of total degree D, that lives through S edge
// placements has expected final degree d * prod_{s=1..S} (1 + 1/(D + 2s - 1)).
// The factor is node independent, so it is computed once and applied to every
// tracked degree.

inline double expected_degree_factor(double total_degree, int64_t slots) {
    if (slots <= 0) return 1.0;
    if (total_degree <= 0) throw std::invalid_argument("expected_degree: total degree must be positive");
    if (slots <= 64) {
        double f = 1.0;
        for (int64_t s = 1; s <= slots; ++s) f *= 1.0 + 1.0 / (total_degree + 2.0 * s - 1.0);
        return f;
    }
    // prod (D+2s)/(D+2s-1) telescopes into a gamma ratio; equivalent to the
    // direct product, stable for very long horizons.
    double d2 = total_degree / 2.0;
    double lf = std::lgamma(d2 + slots + 1) - std::lgamma(d2 + 1) + std::lgamma(d2 + 0.5) -
                std::lgamma(d2 + 0.5 + slots);
    return std::exp(lf);
}

inline double expected_degree(double d_now, double total_degree, int64_t new_nodes, int m) {
    if (d_now < 0) throw std::invalid_argument("expected_degree: degree must be nonnegative");
    if (new_nodes < 0) throw std::invalid_argument("expected_degree: new_nodes must be nonnegative");
    return d_now * expected_degree_factor(total_degree, static_cast<int64_t>(m) * new_nodes);
}

// ---------------------------------------------------------------------------
// Ground-truth growth of the evolving graph.

struct GrowthDelta {
    std::vector<NodeId> new_nodes;
    std::vector<EdgeId> new_edges;  // directed records
};

namespace detail {

// Draw a PA target from the stub list, excluding `self` and nodes already in
// `used`. Falls back to the lowest-id unused node if rejection stalls
// (possible only on very small graphs).
inline NodeId draw_pa_target(const std::vector<NodeId>& stubs, NodeId self,
                             const std::vector<NodeId>& used, NodeId node_count, Rng& rng) {
    auto taken = [&](NodeId v) {
        if (v == self) return true;
        for (NodeId u : used)
            if (u == v) return true;
        return false;
    };
    for (int attempt = 0; attempt < 256; ++attempt) {
        NodeId v = stubs[std::uniform_int_distribution<size_t>(0, stubs.size() - 1)(rng)];
        if (!taken(v)) return v;
    }
    for (NodeId v = 0; v < node_count; ++v)
        if (!taken(v)) return v;
    return -1;
}

}  // namespace detail

// Advances the growth state by one trial span and materializes the arrivals:
// floor(n_end) - floor(n_start) new nodes at `trial`, each placing m edges by
// preferential attachment (target probability proportional to current social
// degree, degrees updated between placements). Repeated targets are redrawn.
inline GrowthDelta grow_one_trial(EvolvingGraph& g, const GrowthParams& p, GrowthState& state,
                                  Trial trial, Rng& rng, bool bidirectional_ties = true) {
    p.validate();
    if (g.tie_count() == 0) throw std::invalid_argument("grow_one_trial: graph needs at least one social tie");

    GrowthState next = integrate_growth(p, state, 1.0);
    int64_t arrivals = static_cast<int64_t>(std::floor(next.n)) - static_cast<int64_t>(std::floor(state.n));
    if (arrivals < 0) arrivals = 0;
    state = next;
    state.realized = static_cast<int64_t>(std::floor(state.n));

    GrowthDelta delta;
    g.advance_to_trial(trial);
    if (arrivals == 0) return delta;

    // One stub per tie endpoint; uniform draws over stubs realize
    // degree-proportional target selection.
    std::vector<NodeId> stubs;
    stubs.reserve(2 * g.tie_count() + 2 * arrivals * p.m);
    for (EdgeId e : g.tie_edges()) {
        stubs.push_back(g.edge(e).src);
        stubs.push_back(g.edge(e).dst);
    }

    for (int64_t i = 0; i < arrivals; ++i) {
        NodeId v = g.add_node(trial);
        delta.new_nodes.push_back(v);
        std::vector<NodeId> used;
        int picks = std::min<int64_t>(p.m, g.node_count() - 1);
        for (int j = 0; j < picks; ++j) {
            NodeId target = detail::draw_pa_target(stubs, v, used, g.node_count(), rng);
            if (target < 0) break;
            used.push_back(target);
            auto ids = g.add_edge(v, target, trial, bidirectional_ties);
            delta.new_edges.insert(delta.new_edges.end(), ids.begin(), ids.end());
            stubs.push_back(v);
            stubs.push_back(target);
        }
    }
    return delta;
}

// Synthetic-network generator: a 2-node seed with one tie, then per-trial
// batches where each new node attaches a single bidirected tie, anchored
// uniformly at random with probability 1/2 and degree-proportionally
// otherwise.
inline EvolvingGraph generate_sn_network(const std::vector<int64_t>& per_trial_counts, Rng& rng) {
    EvolvingGraph g;
    g.add_node(0);
    g.add_node(0);
    g.add_edge(0, 1, 0, true);

    std::vector<NodeId> stubs = {0, 1};
    for (size_t i = 0; i < per_trial_counts.size(); ++i) {
        Trial trial = static_cast<Trial>(i + 1);
        g.advance_to_trial(trial);
        for (int64_t j = 0; j < per_trial_counts[i]; ++j) {
            NodeId v = g.add_node(trial);
            NodeId anchor;
            if (u01(rng) < 0.5) {
                anchor = std::uniform_int_distribution<NodeId>(0, v - 1)(rng);
            } else {
                anchor = stubs[std::uniform_int_distribution<size_t>(0, stubs.size() - 1)(rng)];
            }
            g.add_edge(v, anchor, trial, true);
            stubs.push_back(v);
            stubs.push_back(anchor);
        }
    }
    return g;
}

}  // namespace evoim
