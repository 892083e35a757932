#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "evoim/beliefs.hpp"
#include "evoim/diffusion.hpp"
#include "evoim/graph.hpp"
#include "evoim/rng.hpp"

namespace evoim {

// Known graph at selection time with per-node future-attractiveness weights
// and optimistic edge probabilities.
struct IntermediateGraph {
    const GraphSnapshot* snap = nullptr;
    std::vector<double> node_weight;  // C_v >= 1
    std::vector<double> edge_prob;    // per edge id, in [0,1]
    double n_prime = 0;               // sum of node weights
};

// C_v = E(delta d_v) * (w0_mean + c*sqrt(w0_var)) + 1; edge probabilities are
// the UCB estimates, with never-observed edges at the initial UCB value.
inline IntermediateGraph build_intermediate(const GraphSnapshot& snap,
                                            const std::vector<double>& predicted_delta,
                                            const BeliefTable& beliefs) {
    IntermediateGraph ig;
    ig.snap = &snap;
    const auto& bp = beliefs.params();
    double fresh = bp.w0_mean + bp.c * std::sqrt(bp.w0_var);
    ig.node_weight.resize(snap.node_count());
    for (NodeId v = 0; v < snap.node_count(); ++v) {
        double delta = v < static_cast<NodeId>(predicted_delta.size()) ? predicted_delta[v] : 0.0;
        if (delta < 0) throw std::invalid_argument("build_intermediate: negative predicted delta");
        ig.node_weight[v] = delta * fresh + 1.0;
        ig.n_prime += ig.node_weight[v];
    }
    ig.edge_prob.resize(snap.edge_count());
    for (EdgeId e = 0; e < snap.edge_count(); ++e) ig.edge_prob[e] = beliefs.ucb(e);
    return ig;
}

// ---------------------------------------------------------------------------
// Priority-based root sampling: roots are drawn proportionally to their node
// weight, without replacement within a pass; once every node has served as a
// root the pass resets.

class PrioritySampler {
public:
    explicit PrioritySampler(const std::vector<double>& weights)
        : n_(static_cast<int>(weights.size())), orig_(weights) {
        reset();
    }

    int remaining() const { return remaining_; }

    void reset() {
        tree_.assign(n_ + 1, 0.0);
        total_ = 0;
        removed_.assign(n_, 0);
        for (int i = 0; i < n_; ++i) {
            add(i, orig_[i]);
            total_ += orig_[i];
        }
        remaining_ = n_;
    }

    NodeId sample(Rng& rng) {
        if (n_ == 0) throw std::invalid_argument("priority sampler: empty node set");
        if (remaining_ == 0) reset();
        int idx = locate(u01(rng) * total_);
        add(idx, -orig_[idx]);
        total_ -= orig_[idx];
        removed_[idx] = 1;
        remaining_--;
        return idx;
    }

private:
    void add(int i, double v) {
        for (int x = i + 1; x <= n_; x += x & -x) tree_[x] += v;
    }

    // Smallest index whose prefix sum exceeds target. Zero-weight (removed)
    // entries are never the true answer; float boundary hits walk to the next
    // live entry.
    int locate(double target) const {
        int pos = 0;
        int mask = 1;
        while ((mask << 1) <= n_) mask <<= 1;
        double acc = 0;
        for (; mask > 0; mask >>= 1) {
            int next = pos + mask;
            if (next <= n_ && acc + tree_[next] <= target) {
                pos = next;
                acc += tree_[next];
            }
        }
        int idx = std::min(pos, n_ - 1);
        while (idx < n_ - 1 && removed_[idx]) idx++;
        while (idx > 0 && removed_[idx]) idx--;
        return idx;
    }

    int n_;
    std::vector<double> orig_;
    std::vector<double> tree_;
    std::vector<uint8_t> removed_;
    double total_ = 0;
    int remaining_ = 0;
};

// One-shot variant used where an explicit exclusion set is handier than the
// stateful sampler. An exhausted exclusion set resets to no exclusions.
inline NodeId priority_sample_root(const IntermediateGraph& ig, const std::vector<uint8_t>& excluded, Rng& rng) {
    int n = static_cast<int>(ig.node_weight.size());
    if (n == 0) throw std::invalid_argument("priority_sample_root: empty graph");
    double total = 0;
    bool any = false;
    for (int v = 0; v < n; ++v) {
        if (v < static_cast<int>(excluded.size()) && excluded[v]) continue;
        total += ig.node_weight[v];
        any = true;
    }
    bool use_exclusion = any;
    if (!use_exclusion) {
        total = ig.n_prime;
    }
    double target = u01(rng) * total;
    double acc = 0;
    NodeId last = 0;
    for (int v = 0; v < n; ++v) {
        if (use_exclusion && v < static_cast<int>(excluded.size()) && excluded[v]) continue;
        acc += ig.node_weight[v];
        last = v;
        if (target < acc) return v;
    }
    return last;
}

// ---------------------------------------------------------------------------
// Weighted reverse-reachable sets.

struct ERRSet {
    NodeId root = 0;
    double root_weight = 0;
    std::vector<NodeId> members;  // root first, then BFS discovery order
};

struct ErrSetCollection {
    std::vector<ERRSet> sets;
    double theta_prime = 0;  // sum of root weights over all sets
};

// Generates ERR sets against one intermediate graph; keeps scratch buffers so
// repeated generation stays allocation free.
class ErrSetGenerator {
public:
    explicit ErrSetGenerator(const IntermediateGraph& ig)
        : ig_(&ig), stamp_(ig.snap->node_count(), 0), version_(0) {}

    ERRSet generate(NodeId root, Rng& rng) {
        const GraphSnapshot& snap = *ig_->snap;
        if (!snap.contains_node(root)) throw std::invalid_argument("generate_err_set: unknown root");
        version_++;
        ERRSet s;
        s.root = root;
        s.root_weight = ig_->node_weight[root];
        s.members.push_back(root);
        stamp_[root] = version_;
        for (size_t head = 0; head < s.members.size(); ++head) {
            NodeId u = s.members[head];
            snap.for_each_in(u, [&](const EdgeRecord& e) {
                if (stamp_[e.src] == version_) return;
                if (u01(rng) < ig_->edge_prob[e.id]) {
                    stamp_[e.src] = version_;
                    s.members.push_back(e.src);
                }
            });
        }
        return s;
    }

private:
    const IntermediateGraph* ig_;
    std::vector<int64_t> stamp_;
    int64_t version_;
};

inline ERRSet generate_err_set(const IntermediateGraph& ig, NodeId root, Rng& rng) {
    ErrSetGenerator gen(ig);
    return gen.generate(root, rng);
}

// ---------------------------------------------------------------------------
// Greedy weighted max coverage (lazy evaluation), plus the coverage estimator.

inline double coverage_weight(const ErrSetCollection& R, const std::vector<NodeId>& seeds, NodeId n) {
    std::vector<uint8_t> is_seed(n, 0);
    for (NodeId s : seeds)
        if (s >= 0 && s < n) is_seed[s] = 1;
    double covered = 0;
    for (const auto& s : R.sets) {
        for (NodeId v : s.members) {
            if (is_seed[v]) {
                covered += s.root_weight;
                break;
            }
        }
    }
    return covered;
}

// (n'/theta') * sum of covered root weights.
inline double estimate_influence(const ErrSetCollection& R, double n_prime, const std::vector<NodeId>& seeds,
                                 NodeId n) {
    if (R.sets.empty() || R.theta_prime <= 0) throw std::invalid_argument("estimate_influence: empty collection");
    return n_prime / R.theta_prime * coverage_weight(R, seeds, n);
}

// K rounds of lazily evaluated greedy on weighted set coverage; ties broken by
// lowest node id. If the collection runs out of useful nodes first, the
// remainder is padded with the highest-weight unselected nodes.
inline std::vector<NodeId> greedy_node_selection(const ErrSetCollection& R, int K, const IntermediateGraph& ig) {
    NodeId n = static_cast<NodeId>(ig.node_weight.size());
    K = std::min<int>(K, n);
    if (K <= 0) return {};

    std::vector<std::vector<int>> covering(n);
    for (int i = 0; i < static_cast<int>(R.sets.size()); ++i)
        for (NodeId v : R.sets[i].members) covering[v].push_back(i);

    std::vector<double> gain(n, 0.0);
    for (NodeId v = 0; v < n; ++v)
        for (int i : covering[v]) gain[v] += R.sets[i].root_weight;

    struct Entry {
        double gain;
        NodeId v;
        bool operator<(const Entry& o) const { return gain < o.gain || (gain == o.gain && v > o.v); }
    };
    std::priority_queue<Entry> pq;
    for (NodeId v = 0; v < n; ++v) pq.push({gain[v], v});

    std::vector<uint8_t> chosen(n, 0), covered(R.sets.size(), 0);
    std::vector<NodeId> seeds;
    while (static_cast<int>(seeds.size()) < K && !pq.empty()) {
        Entry top = pq.top();
        pq.pop();
        if (chosen[top.v]) continue;
        if (top.gain != gain[top.v]) {
            pq.push({gain[top.v], top.v});
            continue;
        }
        if (top.gain <= 0) break;
        chosen[top.v] = 1;
        seeds.push_back(top.v);
        for (int i : covering[top.v]) {
            if (covered[i]) continue;
            covered[i] = 1;
            for (NodeId u : R.sets[i].members) gain[u] -= R.sets[i].root_weight;
        }
    }

    if (static_cast<int>(seeds.size()) < K) {
        std::vector<NodeId> rest;
        for (NodeId v = 0; v < n; ++v)
            if (!chosen[v]) rest.push_back(v);
        std::sort(rest.begin(), rest.end(), [&](NodeId a, NodeId b) {
            if (ig.node_weight[a] != ig.node_weight[b]) return ig.node_weight[a] > ig.node_weight[b];
            return a < b;
        });
        for (NodeId v : rest) {
            if (static_cast<int>(seeds.size()) >= K) break;
            seeds.push_back(v);
        }
    }
    return seeds;
}

// ---------------------------------------------------------------------------
// Two-phase ERR-set sampling. Phase 1 geometrically searches for a lower
// bound on the optimum; phase 2 tops the collection up to the final weighted
// sample size. theta' accumulates root weights over the whole collection.

struct SamplerParams {
    int K = 10;
    double epsilon = 0.1;
    double ell = 1.0;

    void validate() const {
        if (K < 1) throw std::invalid_argument("sampler: K must be >= 1");
        if (epsilon <= 0 || epsilon >= 1) throw std::invalid_argument("sampler: epsilon must be in (0,1)");
        if (ell < 1) throw std::invalid_argument("sampler: l must be >= 1");
    }
};

constexpr double kEuler = 2.718281828459045;

inline double log_binomial(double n, double k) {
    return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

inline ErrSetCollection sample_err_sets(const IntermediateGraph& ig, const SamplerParams& sp, Rng& rng) {
    sp.validate();
    ErrSetCollection R;
    NodeId n = static_cast<NodeId>(ig.node_weight.size());
    if (n < 2) {
        if (n == 1) {
            R.sets.push_back({0, ig.node_weight[0], {0}});
            R.theta_prime = ig.node_weight[0];
        }
        return R;
    }

    double n_prime = ig.n_prime;
    double eps = sp.epsilon;
    double eps1 = std::sqrt(2.0) * eps;
    double ln_n = std::log(static_cast<double>(n));
    double ell_hi = sp.ell * (1.0 + std::log(2.0) / ln_n);
    int K = std::min<int>(sp.K, n);
    double logcnk = log_binomial(n, K);
    double alpha = std::sqrt(ell_hi * ln_n + std::log(2.0));
    double beta = std::sqrt((1.0 - 1.0 / kEuler) * (logcnk + ell_hi * ln_n + std::log(2.0)));

    PrioritySampler roots(ig.node_weight);
    ErrSetGenerator gen(ig);
    auto draw_one = [&]() {
        ERRSet s = gen.generate(roots.sample(rng), rng);
        R.theta_prime += s.root_weight;
        R.sets.push_back(std::move(s));
    };

    double lb = 1.0;
    int levels = std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 1);
    for (int i = 1; i <= levels; ++i) {
        double x = n_prime / std::pow(2.0, i);
        double theta_i = (2.0 + 2.0 / 3.0 * eps1) *
                         (logcnk + sp.ell * ln_n + std::log(std::log2(static_cast<double>(n)))) * n_prime /
                         (eps1 * eps1 * x);
        while (static_cast<double>(R.sets.size()) <= theta_i) draw_one();
        auto seeds = greedy_node_selection(R, K, ig);
        double est = n_prime / R.theta_prime * coverage_weight(R, seeds, n);
        if (est >= (1.0 + eps1) * x) {
            lb = est / (1.0 + eps1);
            break;
        }
    }

    double theta = 2.0 * n_prime * std::pow((1.0 - 1.0 / kEuler) * alpha + beta, 2.0) / (lb * eps * eps);
    while (R.theta_prime <= theta) draw_one();
    return R;
}

// ---------------------------------------------------------------------------
// Baselines and the exhaustive oracle.

enum class BaselineKind { ImmStatic, HighestDegree, Earliest };

inline std::vector<NodeId> baseline_select(BaselineKind kind, const GraphSnapshot& snap,
                                           const BeliefTable& beliefs, const SamplerParams& sp, Rng& rng) {
    NodeId n = snap.node_count();
    int K = std::min<int>(sp.K, n);
    switch (kind) {
        case BaselineKind::Earliest: {
            std::vector<NodeId> seeds(K);
            for (int i = 0; i < K; ++i) seeds[i] = i;
            return seeds;
        }
        case BaselineKind::HighestDegree: {
            std::vector<NodeId> order(n);
            for (NodeId v = 0; v < n; ++v) order[v] = v;
            std::partial_sort(order.begin(), order.begin() + K, order.end(), [&](NodeId a, NodeId b) {
                int da = snap.degree(a), db = snap.degree(b);
                if (da != db) return da > db;
                return a < b;
            });
            order.resize(K);
            return order;
        }
        case BaselineKind::ImmStatic: {
            std::vector<double> zero(n, 0.0);
            IntermediateGraph ig = build_intermediate(snap, zero, beliefs);
            auto R = sample_err_sets(ig, sp, rng);
            return greedy_node_selection(R, K, ig);
        }
    }
    throw std::logic_error("baseline_select: unknown kind");
}

struct OptResult {
    std::vector<NodeId> seeds;
    double value = 0;
};

// Exhaustive argmax of exact weighted influence over all size-K seed sets.
// Worlds are enumerated once; per world, per-node closures are reused across
// candidate sets.
inline OptResult brute_force_opt(const InfluenceProblem& ip, int K) {
    if (ip.n > 25) throw std::invalid_argument("brute_force_opt: too many nodes");
    if (ip.edges.size() > kExactEdgeLimit) throw std::invalid_argument("brute_force_opt: too many edges");
    K = std::min<int>(K, ip.n);
    double combos = std::exp(log_binomial(ip.n, K));
    if (combos > 2e5) throw std::invalid_argument("brute_force_opt: too many seed sets");

    std::vector<std::vector<NodeId>> sets;
    std::vector<int> idx(K);
    for (int i = 0; i < K; ++i) idx[i] = i;
    while (true) {
        sets.emplace_back(idx.begin(), idx.end());
        int i = K - 1;
        while (i >= 0 && idx[i] == ip.n - K + i) i--;
        if (i < 0) break;
        idx[i]++;
        for (int j = i + 1; j < K; ++j) idx[j] = idx[j - 1] + 1;
    }

    std::vector<double> value(sets.size(), 0.0);
    std::vector<uint32_t> reach(ip.n);
    uint32_t worlds = 1u << ip.edges.size();
    for (uint32_t w = 0; w < worlds; ++w) {
        double pw = 1.0;
        for (size_t e = 0; e < ip.edges.size(); ++e)
            pw *= (w & (1u << e)) ? ip.prob[e] : 1.0 - ip.prob[e];
        if (pw == 0.0) continue;
        for (NodeId v = 0; v < ip.n; ++v) reach[v] = detail::closure_mask(ip, 1u << v, w);
        for (size_t s = 0; s < sets.size(); ++s) {
            uint32_t mask = 0;
            for (NodeId v : sets[s]) mask |= reach[v];
            value[s] += pw * detail::mask_weight(ip, mask);
        }
    }

    size_t best = 0;
    for (size_t s = 1; s < sets.size(); ++s)
        if (value[s] > value[best]) best = s;
    return {sets[best], value[best]};
}

inline InfluenceProblem make_influence_problem(const IntermediateGraph& ig) {
    InfluenceProblem ip;
    const GraphSnapshot& snap = *ig.snap;
    ip.n = snap.node_count();
    for (EdgeId e = 0; e < snap.edge_count(); ++e) {
        ip.edges.emplace_back(snap.edge(e).src, snap.edge(e).dst);
        ip.prob.push_back(ig.edge_prob[e]);
    }
    ip.node_weight = ig.node_weight;
    return ip;
}

// ---------------------------------------------------------------------------
// Binary cache of an ERR-set collection, for replaying sampler output.

inline void dump_err_sets(const ErrSetCollection& R, std::ostream& out) {
    const char magic[4] = {'E', 'R', 'R', 'S'};
    out.write(magic, 4);
    uint64_t count = R.sets.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(&R.theta_prime), sizeof(double));
    for (const auto& s : R.sets) {
        out.write(reinterpret_cast<const char*>(&s.root), sizeof(s.root));
        out.write(reinterpret_cast<const char*>(&s.root_weight), sizeof(s.root_weight));
        uint32_t sz = static_cast<uint32_t>(s.members.size());
        out.write(reinterpret_cast<const char*>(&sz), sizeof(sz));
        out.write(reinterpret_cast<const char*>(s.members.data()), sz * sizeof(NodeId));
    }
}

inline ErrSetCollection load_err_sets(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "ERRS") throw std::runtime_error("load_err_sets: bad header");
    ErrSetCollection R;
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    in.read(reinterpret_cast<char*>(&R.theta_prime), sizeof(double));
    R.sets.resize(count);
    for (auto& s : R.sets) {
        in.read(reinterpret_cast<char*>(&s.root), sizeof(s.root));
        in.read(reinterpret_cast<char*>(&s.root_weight), sizeof(s.root_weight));
        uint32_t sz = 0;
        in.read(reinterpret_cast<char*>(&sz), sizeof(sz));
        s.members.resize(sz);
        in.read(reinterpret_cast<char*>(s.members.data()), sz * sizeof(NodeId));
    }
    if (!in) throw std::runtime_error("load_err_sets: truncated stream");
    return R;
}

}  // namespace evoim
