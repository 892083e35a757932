#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace evoim {

using NodeId = int32_t;
using EdgeId = int32_t;
using Trial = int32_t;

struct NodeRecord {
    NodeId id;
    Trial join_trial;
    int32_t degree;  // undirected social-tie degree
};

struct EdgeRecord {
    EdgeId id;
    NodeId src;
    NodeId dst;
    Trial establish_trial;
};

class GraphSnapshot;

// Temporal directed multigraph. Nodes and edges carry the trial they appeared
// in and may only be appended in nondecreasing trial order; nothing is ever
// deleted. A social tie between a and b is one add_edge call; it increments
// both endpoint degrees once whether it is stored as one or two directed
// records.
class EvolvingGraph {
public:
    NodeId add_node(Trial join_trial) {
        if (join_trial < max_trial_)
            throw std::invalid_argument("add_node: join trial " + std::to_string(join_trial) +
                                        " precedes already-recorded trial " + std::to_string(max_trial_));
        NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back({id, join_trial, 0});
        out_.emplace_back();
        in_.emplace_back();
        tie_trials_.emplace_back();
        max_trial_ = join_trial;
        return id;
    }

    // Returns the ids of the directed records created (one or two).
    std::vector<EdgeId> add_edge(NodeId src, NodeId dst, Trial establish_trial, bool bidirectional) {
        std::vector<EdgeId> ids;
        ids.push_back(insert_directed(src, dst, establish_trial));
        if (bidirectional) ids.push_back(insert_directed(dst, src, establish_trial));
        return ids;
    }

    // One directed record. The social tie it belongs to is counted on the
    // first direction seen for the unordered pair; the reverse direction of an
    // existing tie does not touch degrees.
    EdgeId insert_directed(NodeId src, NodeId dst, Trial establish_trial) {
        if (src == dst) throw std::invalid_argument("add_edge: self-loop rejected");
        if (!has_node(src) || !has_node(dst)) throw std::invalid_argument("add_edge: unknown endpoint");
        if (establish_trial < max_trial_)
            throw std::invalid_argument("add_edge: establish trial precedes already-recorded trial");
        if (nodes_[src].join_trial > establish_trial || nodes_[dst].join_trial > establish_trial)
            throw std::invalid_argument("add_edge: endpoint joins after establish trial");
        if (directed_pairs_.count(pair_key(src, dst)))
            throw std::invalid_argument("add_edge: duplicate directed pair rejected");

        EdgeId id = static_cast<EdgeId>(edges_.size());
        edges_.push_back({id, src, dst, establish_trial});
        out_[src].push_back(id);
        in_[dst].push_back(id);
        directed_pairs_.insert(pair_key(src, dst));
        if (!directed_pairs_.count(pair_key(dst, src))) {
            nodes_[src].degree++;
            nodes_[dst].degree++;
            tie_trials_[src].push_back(establish_trial);
            tie_trials_[dst].push_back(establish_trial);
            ties_.push_back(id);
        }
        max_trial_ = establish_trial;
        return id;
    }

    // Marks trial `t` as recorded even if it added no nodes or edges, so that
    // snapshots of quiet trials are valid.
    void advance_to_trial(Trial t) {
        if (t < max_trial_) throw std::invalid_argument("advance_to_trial: cannot move backwards");
        max_trial_ = t;
    }

    bool has_node(NodeId v) const { return v >= 0 && v < static_cast<NodeId>(nodes_.size()); }
    bool has_directed_edge(NodeId src, NodeId dst) const { return directed_pairs_.count(pair_key(src, dst)) > 0; }

    NodeId node_count() const { return static_cast<NodeId>(nodes_.size()); }
    EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }
    int64_t tie_count() const { return static_cast<int64_t>(ties_.size()); }
    Trial max_trial() const { return max_trial_; }

    const NodeRecord& node(NodeId v) const { return nodes_.at(v); }
    const EdgeRecord& edge(EdgeId e) const { return edges_.at(e); }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const std::vector<EdgeRecord>& edges() const { return edges_; }

    int32_t degree(NodeId v) const { return nodes_.at(v).degree; }

    // Social degree counting only ties established at or before `trial`.
    int32_t degree_at(NodeId v, Trial trial) const {
        const auto& t = tie_trials_.at(v);
        return static_cast<int32_t>(std::upper_bound(t.begin(), t.end(), trial) - t.begin());
    }

    // Directed records that open each social tie, in establishment order.
    const std::vector<EdgeId>& tie_edges() const { return ties_; }

    GraphSnapshot snapshot(Trial trial) const;

    const std::vector<EdgeId>& out_edges_all(NodeId v) const { return out_.at(v); }
    const std::vector<EdgeId>& in_edges_all(NodeId v) const { return in_.at(v); }

private:
    static uint64_t pair_key(NodeId a, NodeId b) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
    }

    std::vector<NodeRecord> nodes_;
    std::vector<EdgeRecord> edges_;
    std::vector<std::vector<EdgeId>> out_, in_;     // edge ids, ascending
    std::vector<std::vector<Trial>> tie_trials_;    // per node, ascending
    std::vector<EdgeId> ties_;
    std::unordered_set<uint64_t> directed_pairs_;
    Trial max_trial_ = 0;
};

// Read-only view of the graph as of the end of `trial`. Cheap to copy; valid
// while the underlying graph outlives it (append-only mutation never
// invalidates the prefix a snapshot sees).
class GraphSnapshot {
public:
    GraphSnapshot(const EvolvingGraph& g, Trial trial) : g_(&g), trial_(trial) {
        if (trial > g.max_trial()) throw std::invalid_argument("snapshot: future trial");
        const auto& nodes = g.nodes();
        node_count_ = static_cast<NodeId>(
            std::upper_bound(nodes.begin(), nodes.end(), trial,
                             [](Trial t, const NodeRecord& n) { return t < n.join_trial; }) -
            nodes.begin());
        const auto& edges = g.edges();
        edge_count_ = static_cast<EdgeId>(
            std::upper_bound(edges.begin(), edges.end(), trial,
                             [](Trial t, const EdgeRecord& e) { return t < e.establish_trial; }) -
            edges.begin());
    }

    Trial trial() const { return trial_; }
    NodeId node_count() const { return node_count_; }
    EdgeId edge_count() const { return edge_count_; }
    bool contains_node(NodeId v) const { return v >= 0 && v < node_count_; }
    bool contains_edge(EdgeId e) const { return e >= 0 && e < edge_count_; }

    const EvolvingGraph& graph() const { return *g_; }
    const EdgeRecord& edge(EdgeId e) const { return g_->edge(e); }
    int32_t degree(NodeId v) const { return g_->degree_at(v, trial_); }

    template <class F>
    void for_each_out(NodeId v, F&& f) const {
        for (EdgeId e : g_->out_edges_all(v)) {
            if (e >= edge_count_) break;
            f(g_->edge(e));
        }
    }

    template <class F>
    void for_each_in(NodeId v, F&& f) const {
        for (EdgeId e : g_->in_edges_all(v)) {
            if (e >= edge_count_) break;
            f(g_->edge(e));
        }
    }

private:
    const EvolvingGraph* g_;
    Trial trial_;
    NodeId node_count_;
    EdgeId edge_count_;
};

inline GraphSnapshot EvolvingGraph::snapshot(Trial trial) const { return GraphSnapshot(*this, trial); }

// ---------------------------------------------------------------------------
// Temporal CSV ingestion / export.
//
// Row formats (UTF-8, '#' starts a comment, blank lines ignored):
//   node,<external id>,<time>
//   edge,<src external id>,<dst external id>,<time>
// Times are mapped to trial indices by the caller-supplied bucketing function.
// External node ids become dense internal ids in order of first appearance of
// their node rows. Bad rows are reported with their line number and skipped.

struct IngestReport {
    int64_t nodes_added = 0;
    int64_t edges_added = 0;
    std::vector<std::pair<int64_t, std::string>> rejected;  // (line number, reason)
};

using TimeBucketFn = std::function<Trial(double)>;

inline IngestReport ingest_temporal_csv(std::istream& in, EvolvingGraph& g, const TimeBucketFn& bucket) {
    IngestReport report;
    std::unordered_map<long long, NodeId> ids;
    std::string line;
    int64_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);

        try {
            if (fields.at(0) == "node") {
                if (fields.size() != 3) throw std::invalid_argument("node row needs 3 fields");
                long long ext = std::stoll(fields[1]);
                Trial t = bucket(std::stod(fields[2]));
                if (ids.count(ext)) throw std::invalid_argument("duplicate node id");
                ids[ext] = g.add_node(t);
                report.nodes_added++;
            } else if (fields.at(0) == "edge") {
                if (fields.size() != 4) throw std::invalid_argument("edge row needs 4 fields");
                long long es = std::stoll(fields[1]);
                long long ed = std::stoll(fields[2]);
                Trial t = bucket(std::stod(fields[3]));
                auto is = ids.find(es), id = ids.find(ed);
                if (is == ids.end() || id == ids.end()) throw std::invalid_argument("edge references unseen node");
                g.insert_directed(is->second, id->second, t);
                report.edges_added++;
            } else {
                throw std::invalid_argument("unknown row kind '" + fields[0] + "'");
            }
        } catch (const std::exception& e) {
            report.rejected.emplace_back(lineno, e.what());
        }
    }
    return report;
}

// Deterministic arrival-order export: per trial, node rows (id order) then the
// directed edge rows (id order). Re-ingesting with an identity bucketing
// reproduces the records exactly.
inline void export_temporal_csv(const EvolvingGraph& g, std::ostream& out) {
    size_t ni = 0, ei = 0;
    const auto& nodes = g.nodes();
    const auto& edges = g.edges();
    for (Trial t = 0; t <= g.max_trial() && (ni < nodes.size() || ei < edges.size()); ++t) {
        while (ni < nodes.size() && nodes[ni].join_trial == t) {
            out << "node," << nodes[ni].id << "," << t << "\n";
            ni++;
        }
        while (ei < edges.size() && edges[ei].establish_trial == t) {
            out << "edge," << edges[ei].src << "," << edges[ei].dst << "," << t << "\n";
            ei++;
        }
    }
}

inline Trial identity_bucket(double t) { return static_cast<Trial>(t); }

}  // namespace evoim
