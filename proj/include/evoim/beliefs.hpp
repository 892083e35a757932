#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "evoim/diffusion.hpp"
#include "evoim/graph.hpp"

namespace evoim {

// Gaussian posterior over one directed edge weight.
struct EdgeBelief {
    double mean = 0;
    double var = 0;
    Trial born = 0;          // establishment trial, drives the inflation schedule
    Trial last_update = 0;
    bool initialized = false;
};

struct BeliefParams {
    double w0_mean = 0.05;
    double w0_var = 0.008;
    double k = 2.0;   // inflation decay exponent
    double c = 1.0;   // UCB exploration constant

    double initial_ucb() const { return clamp01(w0_mean + c * std::sqrt(w0_var)); }
};

// Scalar Kalman refinement on a triggered edge. The binary outcome has
// observation variance fixed at its maximum 1, so Q = Sigma + 1.
inline EdgeBelief kalman_update(EdgeBelief b, uint8_t z, Trial r, const BeliefParams& p) {
    double q = b.var + 1.0;
    double gain = b.var / q;
    double dvar = walk_variance(r, b.born, p.k, p.w0_var);
    b.mean = b.mean + gain * (static_cast<double>(z) - b.mean);
    b.var = b.var + dvar - gain * b.var;
    b.last_update = r;
    return b;
}

// Variance inflation for an edge that saw no outcome this trial.
inline EdgeBelief idle_update(EdgeBelief b, Trial r, const BeliefParams& p) {
    b.var += walk_variance(r, b.born, p.k, p.w0_var);
    b.last_update = r;
    return b;
}

inline double ucb_estimate(const EdgeBelief& b, double c) {
    return clamp01(b.mean + c * std::sqrt(b.var));
}

// Belief table over directed edges. Edges materialize on their first observed
// outcome with the (w0_mean, w0_var) prior; edges never observed report the
// initial UCB value.
class BeliefTable {
public:
    explicit BeliefTable(BeliefParams params = {}) : params_(params) {}

    const BeliefParams& params() const { return params_; }

    bool known(EdgeId e) const { return e < static_cast<EdgeId>(beliefs_.size()) && beliefs_[e].initialized; }

    const EdgeBelief& belief(EdgeId e) const {
        if (!known(e)) throw std::out_of_range("belief: edge never observed");
        return beliefs_[e];
    }

    double ucb(EdgeId e) const {
        if (!known(e)) return params_.initial_ucb();
        return ucb_estimate(beliefs_[e], params_.c);
    }

    // Evolving influence learning for one trial: triggered edges get the
    // Kalman refinement, every other known edge inflates. Edges first seen in
    // this feedback are registered with the prior before their update.
    void process_feedback(const TrialFeedback& fb, const EvolvingGraph& g, Trial r) {
        std::vector<uint8_t> touched(beliefs_.size(), 0);
        for (const auto& [e, z] : fb.edge_outcomes) {
            if (e >= static_cast<EdgeId>(beliefs_.size())) beliefs_.resize(e + 1);
            if (e < static_cast<EdgeId>(touched.size())) touched[e] = 1;
            EdgeBelief& b = beliefs_[e];
            if (!b.initialized) {
                b.initialized = true;
                b.mean = params_.w0_mean;
                b.var = params_.w0_var;
                b.born = g.edge(e).establish_trial;
            }
            b = kalman_update(b, z, r, params_);
        }
        for (EdgeId e = 0; e < static_cast<EdgeId>(touched.size()); ++e) {
            if (touched[e] || !beliefs_[e].initialized) continue;
            beliefs_[e] = idle_update(beliefs_[e], r, params_);
        }
    }

    size_t observed_count() const {
        size_t n = 0;
        for (const auto& b : beliefs_)
            if (b.initialized) n++;
        return n;
    }

    void to_csv(std::ostream& out) const {
        out << "edge,mean,var,born,last_update\n";
        for (EdgeId e = 0; e < static_cast<EdgeId>(beliefs_.size()); ++e) {
            if (!beliefs_[e].initialized) continue;
            out << e << "," << beliefs_[e].mean << "," << beliefs_[e].var << "," << beliefs_[e].born << ","
                << beliefs_[e].last_update << "\n";
        }
    }

private:
    BeliefParams params_;
    std::vector<EdgeBelief> beliefs_;
};

}  // namespace evoim
