#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neuromas/policy.hpp"
#include "neuromas/runtime.hpp"
#include "neuromas/tasks.hpp"
#include "neuromas/topology.hpp"

namespace neuromas {

/// rho * b + (1 - rho) * r. Inputs must sit in [0,1] (b, r) and (0,1)
/// (rho); the result then stays in [0,1] by induction.
double update_baseline(double b, double r, double rho);

/// Per-node exponential-moving-average reward baselines.
struct BaselineState {
    std::map<NodeAddress, double> values;
    double rho = 0.9;

    static BaselineState zeros(const Topology& topo, double rho = 0.9);
    double value(const NodeAddress& addr) const;
    void observe(const NodeAddress& addr, double reward);
};

struct TrainConfig {
    double learning_rate = 1e-2;
    double clip_norm = 1.0;
    int batch_size = 16;
    int steps = 200;
    int checkpoint_interval = 20;
    int dev_size = 64;
    int max_tokens = 6;
    double rho = 0.9;          // baseline decay
    double weight_decay = 0.0; // decoupled, applied by the optimizer
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 1;
    bool deterministic_metrics = true;  // zeroes the wallclock column so CSVs replay byte-for-byte

    void validate() const;
};

/// Decoupled-weight-decay adaptive-moment optimizer over all node deltas.
class AdamW {
public:
    AdamW() = default;
    AdamW(const PolicySet& policies, double lr, double beta1, double beta2, double eps,
          double weight_decay);

    void step(PolicySet& policies, const GradientSet& grads);
    int steps_taken() const { return t_; }

private:
    double lr_ = 1e-2, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8, wd_ = 0.0;
    int t_ = 0;
    std::map<NodeAddress, DeltaGrad> m_, v_;
};

/// Per-node surrogate terms -(r - b_v) * mean_logprob_v and their sum,
/// teacher-forced against the trace's recorded contexts and tokens.
struct SurrogateLoss {
    double total = 0.0;
    std::map<NodeAddress, double> per_node;
};

SurrogateLoss surrogate_loss(const Trace& trace, const BaselineState& baselines,
                             const PolicySet& policies);

struct StepMetrics {
    double mean_reward = 0.0;
    double loss = 0.0;
    double grad_norm_preclip = 0.0;
    double grad_norm_postclip = 0.0;
};

/// Loss gradient averaged over forward passes of `batch`, with the
/// per-instance traces and streamed baseline updates (each instance sees
/// the baselines left by the previous one). Exposed separately from
/// train_step so oracles can inspect the raw gradient.
StepMetrics collect_batch_gradient(const PolicySet& policies, const Topology& topo,
                                   const std::vector<TaskInstance>& batch,
                                   BaselineState& baselines, const TrainConfig& config,
                                   uint64_t episode_base, GradientSet& grads_out,
                                   std::vector<Trace>* traces_out = nullptr);

/// One REINFORCE step: sample-mode forwards, rewards, surrogate gradient,
/// global norm clip, optimizer update.
StepMetrics train_step(PolicySet& policies, const Topology& topo,
                       const std::vector<TaskInstance>& batch, BaselineState& baselines,
                       const TrainConfig& config, AdamW& optimizer, uint64_t episode_base);

struct MetricRow {
    int step = 0;
    double mean_reward = 0.0;
    double loss = 0.0;
    double grad_norm_preclip = 0.0;
    double grad_norm_postclip = 0.0;
    std::optional<double> dev_accuracy;
    double wallclock_s = 0.0;
};

std::string metrics_to_csv(const std::vector<MetricRow>& rows);

/// Greedy-decoding exact-match accuracy.
double evaluate_accuracy(const PolicySet& policies, const Topology& topo,
                         const std::vector<TaskInstance>& tasks, int max_tokens);

struct TrainResult {
    PolicySet best;
    BaselineState best_baselines;
    double best_dev_accuracy = 0.0;
    int best_step = 0;  // earliest argmax
    std::vector<MetricRow> history;
    PolicySet final_policies;
    BaselineState final_baselines;
};

/// Runs `config.steps` train steps, evaluating the dev set with greedy
/// decoding at step 0 and every checkpoint interval, and returns the
/// earliest-argmax checkpoint plus the metric history.
TrainResult train_loop(const PolicySet& initial, const Topology& topo,
                       const std::vector<TaskInstance>& train_tasks,
                       const std::vector<TaskInstance>& dev_tasks, const TrainConfig& config,
                       BaselineState* initial_baselines = nullptr);

/// Exact policy gradient per node delta on one instance, by joint trace
/// enumeration: sum_xi p(xi) (r - b_v) grad log pi_v(Z_v | C_v).
GradientSet estimate_gradient_bruteforce(const PolicySet& policies, const Topology& topo,
                                         const std::string& task_input, const std::string& gold,
                                         const BaselineState& baselines, int max_tokens,
                                         FooterKind footer = FooterKind::none);

/// Exhaustively computed expected reward of one instance.
double expected_reward_exhaustive(const PolicySet& policies, const Topology& topo,
                                  const std::string& task_input, const std::string& gold,
                                  int max_tokens, FooterKind footer = FooterKind::none);

}  // namespace neuromas
