#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "neuromas/linalg.hpp"
#include "neuromas/topology.hpp"
#include "neuromas/vocab.hpp"

namespace neuromas {

/// Node-specific low-rank adjustment of the shared logit map. Applied
/// input-side first: delta_logits = B * (A * x). B starts at zero, so a
/// fresh delta leaves the base distribution untouched.
struct NodeDelta {
    Matrix A;  // rank x feature_dim
    Matrix B;  // vocab x rank

    bool operator==(const NodeDelta& o) const { return A == o.A && B == o.B; }
};

/// Gradient with respect to one node delta.
struct DeltaGrad {
    Matrix dA;
    Matrix dB;

    double sq_norm() const { return dA.sq_norm() + dB.sq_norm(); }
};

using GradientSet = std::map<NodeAddress, DeltaGrad>;

double gradient_set_norm(const GradientSet& grads);

enum class DecodeMode { sample, greedy };
enum class LogprobNorm { mean, sum };

/// One autoregressive generation: emitted tokens (EOS-terminated or cut
/// at the length cap) with their log-probabilities under the sampling
/// distribution.
struct SampleResult {
    std::vector<int> tokens;
    std::vector<double> token_logprobs;
    double mean_logprob = 0.0;

    double sum_logprob() const {
        double s = 0.0;
        for (double v : token_logprobs) s += v;
        return s;
    }
};

struct Outcome {
    std::vector<int> tokens;
    double probability = 0.0;
};

enum class ParamScope { per_node, total_trainable };

/// How the shared frozen base logit map is initialized.
struct BaseInit {
    enum class Kind { zeros, randn };
    Kind kind = Kind::zeros;
    double scale = 0.1;
    uint64_t seed = 0;
};

/// Shared frozen base plus one trainable low-rank delta per node of a
/// topology (including the output node). Reads are safe to share across
/// threads; parameter updates require exclusive access.
class PolicySet {
public:
    PolicySet() = default;

    static PolicySet make(const Vocabulary& vocab, const FeatureConfig& fc, int rank,
                          const Topology& topo, const BaseInit& base_init, uint64_t init_seed);

    const Vocabulary& vocab() const { return vocab_; }
    const FeatureConfig& feature_config() const { return fc_; }
    int rank() const { return rank_; }
    const Topology& topology() const { return topo_; }
    const Matrix& base() const { return base_; }
    uint64_t init_seed() const { return init_seed_; }
    int dim() const { return feature_dim(fc_, vocab_.size()); }

    bool has_node(const NodeAddress& addr) const { return deltas_.count(addr) > 0; }
    const NodeDelta& delta(const NodeAddress& addr) const;
    NodeDelta& delta_mut(const NodeAddress& addr);
    const std::map<NodeAddress, NodeDelta>& deltas() const { return deltas_; }

    /// Deterministic fresh delta for `addr`: A seeded from (init_seed,
    /// address), B zero. Used both at construction and by growth.
    NodeDelta fresh_delta(const NodeAddress& addr) const;

    /// Effective next-token logits for a node given the active feature
    /// indices of the current state.
    std::vector<double> logits(const NodeAddress& addr, const std::vector<int>& active) const;
    std::vector<double> log_probs(const NodeAddress& addr, const std::vector<int>& active) const;

    /// Autoregressive generation conditioned on `context`. Sampling walks
    /// the cumulative distribution in token-id order on one uniform draw
    /// per step; greedy takes the lowest-index argmax.
    SampleResult sample(const NodeAddress& addr, const std::vector<int>& context,
                        std::mt19937_64& rng, int max_tokens, DecodeMode mode) const;

    /// Teacher-forced mean token log-probability of `tokens` given
    /// `context`.
    double mean_logprob(const NodeAddress& addr, const std::vector<int>& context,
                        const std::vector<int>& tokens) const;

    /// Analytic gradient of the (mean or sum) sequence log-probability
    /// with respect to the node's delta. The base receives no gradient.
    DeltaGrad grad_logprob(const NodeAddress& addr, const std::vector<int>& context,
                           const std::vector<int>& tokens, LogprobNorm norm) const;
    DeltaGrad grad_mean_logprob(const NodeAddress& addr, const std::vector<int>& context,
                                const std::vector<int>& tokens) const;

    long long param_count(ParamScope scope) const;

    /// Exhaustive outcome enumeration: every sequence terminating by EOS
    /// or at the cap, with exact probability. Guarded to |V|^max_tokens
    /// <= 1e5.
    std::vector<Outcome> enumerate_outcomes(const NodeAddress& addr,
                                            const std::vector<int>& context,
                                            int max_tokens) const;

    DeltaGrad zero_grad() const;

    // Versioned JSON checkpoint container. `extra` round-trips opaque
    // sidecar data (the trainer stores baselines there).
    std::string to_json(const std::map<std::string, double>& extra = {}) const;
    static PolicySet from_json(const std::string& text, std::map<std::string, double>* extra = nullptr);
    void save(const std::string& path, const std::map<std::string, double>& extra = {}) const;
    static PolicySet load(const std::string& path, std::map<std::string, double>* extra = nullptr);

    bool operator==(const PolicySet& o) const {
        return vocab_ == o.vocab_ && fc_ == o.fc_ && rank_ == o.rank_ && topo_ == o.topo_ &&
               base_ == o.base_ && deltas_ == o.deltas_ && init_seed_ == o.init_seed_;
    }

private:
    friend PolicySet grow_policies(const PolicySet&, const Topology&);

    Vocabulary vocab_;
    FeatureConfig fc_;
    int rank_ = 0;
    Topology topo_;
    Matrix base_;
    std::map<NodeAddress, NodeDelta> deltas_;
    uint64_t init_seed_ = 0;
};

}  // namespace neuromas
