#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "neuromas/messaging.hpp"
#include "neuromas/policy.hpp"
#include "neuromas/tasks.hpp"
#include "neuromas/topology.hpp"

namespace neuromas {

/// Everything one node did during a forward pass.
struct NodeRecord {
    NodeAddress addr;
    RenderedContext context;
    std::vector<int> context_tokens;        // toy mode only
    std::optional<SampleResult> sample;     // absent in remote mode
    std::string text;                       // raw generated text
    std::vector<std::string> outgoing;      // parsed recipient payloads
};

/// Full record of one sampled computation: per-node contexts,
/// generations and messages in (layer, position) order followed by the
/// output node, plus the final answer and (once scored) the terminal
/// reward.
struct Trace {
    uint64_t episode = 0;
    Topology topo;
    std::string task_input;
    std::string mode;  // "sample" | "greedy" | "remote-greedy" | ...
    uint64_t seed = 0;
    std::vector<NodeRecord> records;
    std::string answer_raw;
    std::string answer_canonical;
    std::optional<double> reward;
    std::optional<std::string> error;  // partial-trace annotation (remote mode)
    int n_calls = 0;

    /// Sum of recorded per-node sequence log-probabilities. Requires toy
    /// records.
    double recorded_logprob() const;

    std::string to_json_line() const;
};

/// What a sampler returns for one node invocation.
struct NodeGeneration {
    std::string text;
    std::optional<SampleResult> sample;
    std::vector<int> context_tokens;
};

/// Pluggable node sampler: the one orchestration path below serves both
/// the built-in policy and remote endpoints.
using NodeSampler = std::function<NodeGeneration(const NodeAddress&, const RenderedContext&)>;

struct ForwardOptions {
    FooterKind footer = FooterKind::none;
    std::string code_prompt;
    TaskKind canonicalize_as = TaskKind::verbatim;
    uint64_t episode = 0;
    uint64_t seed = 0;
    std::string mode = "sample";
};

/// Layer-by-layer forward pass: render layer contexts, invoke the
/// sampler, parse recipient messages, then render and invoke the output
/// node. Total message parsing means malformed generations never fail the
/// pass.
Trace run_forward(const NodeSampler& sampler, const Topology& topo, const std::string& task_input,
                  const ForwardOptions& opts);

/// Forward pass with the built-in policy set. Per-node randomness is
/// derived from (seed, episode, address), so within-layer order cannot
/// affect content and traces replay exactly.
Trace forward(const PolicySet& policies, const Topology& topo, const std::string& task_input,
              uint64_t seed, uint64_t episode, DecodeMode mode, FooterKind footer,
              int max_tokens = 8, const std::string& code_prompt = "");

/// Teacher-forced log p(trace): the sum over node records of full
/// sequence log-probabilities against the recorded contexts and tokens.
double trace_logprob(const Trace& trace, const PolicySet& policies);

struct TraceOutcome {
    Trace trace;
    double probability = 0.0;
};

/// Joint exhaustive enumeration of all traces of a (tiny) instance.
/// Guarded: throws once the trace count would exceed 1e5.
std::vector<TraceOutcome> enumerate_traces(const PolicySet& policies, const Topology& topo,
                                           const std::string& task_input, int max_tokens,
                                           FooterKind footer = FooterKind::none);

/// Appends one JSON object per trace to a JSON-lines audit log.
class TraceLog {
public:
    explicit TraceLog(const std::string& path);
    void append(const Trace& trace);

private:
    std::string path_;
};

}  // namespace neuromas
