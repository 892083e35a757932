#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "evoim/diffusion.hpp"
#include "evoim/graph.hpp"
#include "evoim/growth.hpp"
#include "evoim/rng.hpp"

namespace evoim {

struct DegreeObservation {
    NodeId node = 0;
    int32_t observed_degree = 0;
    Trial last_observed_trial = 0;
    int32_t last_observed_degree = 0;
};

// Eqn-style prior/posterior sums over the re-observed nodes. `estimates`
// carries one expected current degree per observation, aligned by index.
inline double particle_prior(const std::vector<double>& estimates, const std::vector<DegreeObservation>& obs) {
    if (estimates.size() != obs.size()) throw std::invalid_argument("particle_prior: misaligned inputs");
    double sum = 0;
    for (size_t i = 0; i < obs.size(); ++i) sum += estimates[i] - obs[i].last_observed_degree;
    return sum;
}

inline double particle_posterior(const std::vector<DegreeObservation>& obs) {
    double sum = 0;
    for (const auto& o : obs) sum += o.observed_degree - o.last_observed_degree;
    return sum;
}

// weight_i proportional to 1 / ((posterior - prior_i)^2 + delta), normalized.
inline std::vector<double> particle_weights(const std::vector<double>& priors, double posterior, double delta) {
    if (delta <= 0) throw std::invalid_argument("particle_weights: delta must be positive");
    std::vector<double> w(priors.size());
    double total = 0;
    for (size_t i = 0; i < priors.size(); ++i) {
        double err = posterior - priors[i];
        w[i] = 1.0 / (err * err + delta);
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

// Low-variance systematic resampling; returns exactly weights.size() source
// indices, in nondecreasing order.
inline std::vector<int> systematic_resample_indices(const std::vector<double>& weights, Rng& rng) {
    int m = static_cast<int>(weights.size());
    if (m == 0) throw std::invalid_argument("resample: empty population");
    std::vector<int> picks;
    picks.reserve(m);
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double offset = u01(rng);
    double cum = 0;
    int i = 0;
    for (int j = 0; j < m; ++j) {
        cum += weights[j] / total;
        while (i < m && (offset + i) / m < cum) {
            picks.push_back(j);
            i++;
        }
    }
    while (static_cast<int>(picks.size()) < m) picks.push_back(m - 1);
    return picks;
}

struct ParticleRanges {
    double beta_lo = 1e-8, beta_hi = 1.0;
    double theta_lo = 1e-4, theta_hi = 10.0;
    double capacity_lo = 1e5, capacity_hi = 1e8;
};

// One growth hypothesis. Degree expectations are stored lazily: the expected
// degree of a node whose real degree was last seen at boundary q is
// base_degree * exp(log_cum[r] - log_cum[q-1]), because the propagation
// factor of one trial is shared by every node.
struct Particle {
    GrowthParams params;
    GrowthState sim;
    double weight = 0;
    int origin = 0;  // index at initialization; survives resampling
    std::vector<double> log_cum;                    // log_cum[j]: trials 1..j applied
    std::vector<std::pair<Trial, double>> virtual_groups;  // (arrival trial, remaining count)
};

struct EvoNeParams {
    int M = 500;
    double delta = 1.0;
    ParticleRanges ranges;
    int m = 1;       // edges per arriving node
    double t0 = 1.0;
};

inline std::vector<Particle> init_particles(const EvoNeParams& p, double n_initial, Rng& rng) {
    if (p.M < 1) throw std::invalid_argument("init_particles: M must be >= 1");
    std::vector<Particle> out(p.M);
    for (int i = 0; i < p.M; ++i) {
        Particle& pt = out[i];
        pt.params.beta = log_uniform(rng, p.ranges.beta_lo, p.ranges.beta_hi);
        pt.params.theta = log_uniform(rng, p.ranges.theta_lo, p.ranges.theta_hi);
        pt.params.capacity_N = log_uniform(rng, p.ranges.capacity_lo, p.ranges.capacity_hi);
        pt.params.m = p.m;
        pt.params.t0 = p.t0;
        pt.sim.t = p.t0;
        pt.sim.n = n_initial;
        pt.sim.realized = static_cast<int64_t>(std::floor(n_initial));
        pt.weight = 1.0 / p.M;
        pt.origin = i;
        pt.log_cum = {0.0};
    }
    return out;
}

struct EvoNeStep {
    std::vector<double> predicted_delta;  // per node id of the known snapshot
    double mean_population = 0;           // mean particle population at the trial start
    int evidence_count = 0;
    bool resampled = false;
};

// Evolving-network estimation: weighted particles over growth parameters,
// scored each trial by how well their expected degree increments match the
// observed increments of re-influenced nodes, then systematically resampled
// and propagated one trial ahead to predict per-node incremental degrees.
class EvoNeFilter {
public:
    EvoNeFilter(const EvoNeParams& params, const GraphSnapshot& initial, Rng& rng)
        : p_(params), trial_(1) {
        particles_ = init_particles(p_, static_cast<double>(initial.node_count()), rng);
        absorb_snapshot(initial);
    }

    // Deterministic population from explicit growth hypotheses (M = size).
    EvoNeFilter(const EvoNeParams& params, const GraphSnapshot& initial,
                const std::vector<GrowthParams>& hypotheses)
        : p_(params), trial_(1) {
        if (hypotheses.empty()) throw std::invalid_argument("filter: empty hypothesis set");
        p_.M = static_cast<int>(hypotheses.size());
        particles_.resize(hypotheses.size());
        for (size_t i = 0; i < hypotheses.size(); ++i) {
            Particle& pt = particles_[i];
            pt.params = hypotheses[i];
            pt.sim.t = pt.params.t0;
            pt.sim.n = static_cast<double>(initial.node_count());
            pt.sim.realized = initial.node_count();
            pt.weight = 1.0 / static_cast<double>(hypotheses.size());
            pt.origin = static_cast<int>(i);
            pt.log_cum = {0.0};
        }
        absorb_snapshot(initial);
    }

    // Advances the filter through trial r (its internal clock): consumes the
    // feedback observed from the previous trial, resamples, and emits the
    // predicted degree increments over the coming trial for every node of
    // `known` (the graph visible at selection time).
    EvoNeStep step(const TrialFeedback* fb, const GraphSnapshot& known, Rng& rng) {
        EvoNeStep result;
        Trial r = trial_;

        // --- resampling phase ---
        std::vector<DegreeObservation> evidence;
        if (fb) evidence = reobserved(*fb);
        result.evidence_count = static_cast<int>(evidence.size());
        if (!evidence.empty()) {
            double post = particle_posterior(evidence);
            std::vector<double> priors(particles_.size());
            for (size_t i = 0; i < particles_.size(); ++i) priors[i] = prior_of(particles_[i], evidence, r);
            std::vector<double> w = particle_weights(priors, post, p_.delta);
            auto picks = systematic_resample_indices(w, rng);
            std::vector<Particle> next;
            next.reserve(particles_.size());
            for (int idx : picks) next.push_back(particles_[idx]);
            for (auto& pt : next) pt.weight = 1.0 / static_cast<double>(next.size());
            particles_ = std::move(next);
            result.resampled = true;
        }

        // --- ledger update: absorb new structure, snap observed degrees ---
        absorb_snapshot(known);
        if (fb) {
            for (const auto& [v, deg] : fb->degree_observations) {
                if (v < static_cast<NodeId>(known_at_.size())) snap_node(v, deg, r);
            }
            for (NodeId v : fb->influenced)
                if (v < static_cast<NodeId>(influenced_ever_.size())) influenced_ever_[v] = 1;
        }

        double pop_sum = 0;
        for (const auto& pt : particles_) pop_sum += pt.sim.n;
        result.mean_population = pop_sum / static_cast<double>(particles_.size());

        // --- propagation phase: one trial ahead under each particle ---
        for (auto& pt : particles_) propagate(pt, r);

        // --- prediction: mean expected increment since the last observation ---
        std::vector<double> avg_ratio(r + 1, 0.0);
        for (const auto& pt : particles_) {
            for (Trial q = 1; q <= r; ++q) avg_ratio[q] += std::exp(pt.log_cum[r] - pt.log_cum[q - 1]);
        }
        for (Trial q = 1; q <= r; ++q) avg_ratio[q] /= static_cast<double>(particles_.size());

        result.predicted_delta.resize(known.node_count());
        for (NodeId v = 0; v < known.node_count(); ++v) {
            double pred = base_degree_[v] * (avg_ratio[known_at_[v]] - 1.0);
            result.predicted_delta[v] = std::max(0.0, pred);
        }

        trial_++;
        return result;
    }

    // Nodes influenced this trial that were influenced in an earlier trial,
    // paired with their last recorded degrees.
    std::vector<DegreeObservation> reobserved(const TrialFeedback& fb) const {
        std::vector<DegreeObservation> out;
        for (const auto& [v, deg] : fb.degree_observations) {
            if (v >= static_cast<NodeId>(influenced_ever_.size()) || !influenced_ever_[v]) continue;
            if (!std::binary_search(fb.influenced.begin(), fb.influenced.end(), v)) continue;
            out.push_back({v, deg, known_at_[v], static_cast<int32_t>(base_degree_[v])});
        }
        return out;
    }

    const std::vector<Particle>& particles() const { return particles_; }
    Trial trial() const { return trial_; }

    double mean_population() const {
        double s = 0;
        for (const auto& pt : particles_) s += pt.sim.n;
        return s / static_cast<double>(particles_.size());
    }

    // Expected current degree of an observation's node under one particle.
    double particle_estimate(const Particle& pt, const DegreeObservation& obs, Trial r) const {
        return obs.last_observed_degree * std::exp(pt.log_cum[r - 1] - pt.log_cum[obs.last_observed_trial - 1]);
    }

private:
    double prior_of(const Particle& pt, const std::vector<DegreeObservation>& evidence, Trial r) const {
        std::vector<double> est(evidence.size());
        for (size_t i = 0; i < evidence.size(); ++i) est[i] = particle_estimate(pt, evidence[i], r);
        return particle_prior(est, evidence);
    }

    void snap_node(NodeId v, int32_t deg, Trial r) {
        group_sum_.resize(std::max<size_t>(group_sum_.size(), r + 1), 0.0);
        group_sum_[known_at_[v]] -= base_degree_[v];
        base_degree_[v] = deg;
        known_at_[v] = r;
        group_sum_[r] += deg;
    }

    // New nodes in the visible snapshot enter the ledger with their current
    // structural degree; each particle gives up that many predicted arrivals.
    void absorb_snapshot(const GraphSnapshot& snap) {
        NodeId old_count = static_cast<NodeId>(known_at_.size());
        if (snap.node_count() <= old_count) return;
        Trial boundary = trial_;
        group_sum_.resize(std::max<size_t>(group_sum_.size(), boundary + 1), 0.0);
        for (NodeId v = old_count; v < snap.node_count(); ++v) {
            base_degree_.push_back(snap.degree(v));
            known_at_.push_back(boundary);
            influenced_ever_.push_back(0);
            group_sum_[boundary] += snap.degree(v);
        }
        double realized = static_cast<double>(snap.node_count() - old_count);
        for (auto& pt : particles_) {
            double remaining = realized;
            for (auto it = pt.virtual_groups.rbegin(); it != pt.virtual_groups.rend() && remaining > 0; ++it) {
                double take = std::min(it->second, remaining);
                it->second -= take;
                remaining -= take;
            }
        }
    }

    // Total expected degree of the particle's simulated population at T^r:
    // known nodes at their tracked expectations plus the still-virtual
    // arrivals that entered at degree m.
    double total_degree(const Particle& pt, Trial r) const {
        double sum = 0;
        for (Trial q = 1; q < static_cast<Trial>(group_sum_.size()) && q <= r; ++q) {
            if (group_sum_[q] == 0.0) continue;
            sum += group_sum_[q] * std::exp(pt.log_cum[r - 1] - pt.log_cum[q - 1]);
        }
        for (const auto& [b, count] : pt.virtual_groups) {
            if (count <= 0) continue;
            sum += p_.m * count * std::exp(pt.log_cum[r - 1] - pt.log_cum[b]);
        }
        return sum;
    }

    void propagate(Particle& pt, Trial r) {
        double d_total = total_degree(pt, r);
        GrowthState next = integrate_growth(pt.params, pt.sim, 1.0);
        int64_t arrivals =
            static_cast<int64_t>(std::floor(next.n)) - static_cast<int64_t>(std::floor(pt.sim.n));
        if (arrivals < 0) arrivals = 0;
        pt.sim = next;
        double factor = d_total > 0 ? expected_degree_factor(d_total, static_cast<int64_t>(p_.m) * arrivals) : 1.0;
        pt.log_cum.push_back(pt.log_cum.back() + std::log(factor));
        if (arrivals > 0) pt.virtual_groups.emplace_back(r, static_cast<double>(arrivals));
    }

    EvoNeParams p_;
    Trial trial_;
    std::vector<Particle> particles_;
    std::vector<double> base_degree_;   // last recorded degree per known node
    std::vector<Trial> known_at_;       // boundary the record refers to
    std::vector<uint8_t> influenced_ever_;
    std::vector<double> group_sum_;     // sum of base degrees per boundary
};

}  // namespace evoim
