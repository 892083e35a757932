#pragma once

// Shared test fixtures: a fixed 6-node weighted instance and a random small
// instance generator. Instances own their graph so the returned
// IntermediateGraph stays valid.

#include <memory>
#include <vector>

#include "evoim/diffusion.hpp"
#include "evoim/graph.hpp"
#include "evoim/seed_selection.hpp"

namespace evoim_test {

struct Instance {
    std::unique_ptr<evoim::EvolvingGraph> graph;
    std::unique_ptr<evoim::GraphSnapshot> snap;
    evoim::IntermediateGraph ig;

    evoim::InfluenceProblem problem() const { return evoim::make_influence_problem(ig); }
};

inline Instance six_node_fixture() {
    Instance inst;
    inst.graph = std::make_unique<evoim::EvolvingGraph>();
    auto& g = *inst.graph;
    for (int i = 0; i < 6; ++i) g.add_node(0);
    struct E {
        int s, d;
        double p;
    };
    const std::vector<E> edges = {{0, 1, 0.4},  {1, 2, 0.3},  {2, 0, 0.5}, {2, 3, 0.6}, {3, 4, 0.25},
                                  {4, 5, 0.35}, {5, 3, 0.45}, {1, 4, 0.2}, {0, 5, 0.15}};
    for (const auto& e : edges) g.insert_directed(e.s, e.d, 0);

    inst.snap = std::make_unique<evoim::GraphSnapshot>(g, 0);
    inst.ig.snap = inst.snap.get();
    inst.ig.node_weight = {1.5, 1.0, 2.0, 1.2, 3.0, 1.0};
    for (double w : inst.ig.node_weight) inst.ig.n_prime += w;
    for (const auto& e : edges) inst.ig.edge_prob.push_back(e.p);
    return inst;
}

// Random directed instance: n nodes, up to max_edges distinct directed pairs,
// probabilities in [0.1, 0.6], node weights in [1, 3].
inline Instance random_instance(evoim::Rng& rng, int n = 8, int max_edges = 12) {
    Instance inst;
    inst.graph = std::make_unique<evoim::EvolvingGraph>();
    auto& g = *inst.graph;
    for (int i = 0; i < n; ++i) g.add_node(0);
    int edges = 0, attempts = 0;
    std::vector<double> probs;
    while (edges < max_edges && attempts < 10 * max_edges) {
        attempts++;
        int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
        int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (a == b || g.has_directed_edge(a, b)) continue;
        g.insert_directed(a, b, 0);
        probs.push_back(0.1 + 0.5 * evoim::u01(rng));
        edges++;
    }
    inst.snap = std::make_unique<evoim::GraphSnapshot>(g, 0);
    inst.ig.snap = inst.snap.get();
    for (int i = 0; i < n; ++i) {
        double c = 1.0 + 2.0 * evoim::u01(rng);
        inst.ig.node_weight.push_back(c);
        inst.ig.n_prime += c;
    }
    inst.ig.edge_prob = probs;
    return inst;
}

}  // namespace evoim_test
