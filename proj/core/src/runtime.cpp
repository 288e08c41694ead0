#include "neuromas/runtime.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace neuromas {

using nlohmann::json;

double Trace::recorded_logprob() const {
    double s = 0.0;
    for (const NodeRecord& r : records) {
        if (!r.sample) throw std::runtime_error("recorded_logprob: trace has no token records");
        s += r.sample->sum_logprob();
    }
    return s;
}

std::string Trace::to_json_line() const {
    json j;
    j["episode"] = episode;
    j["topology"] = topo.canonical_string();
    j["input"] = task_input;
    j["mode"] = mode;
    j["seed"] = seed;
    j["n_calls"] = n_calls;
    json recs = json::array();
    for (const NodeRecord& r : records) {
        json jr;
        jr["node"] = r.addr.str();
        jr["context"] = r.context.text;
        jr["generated"] = r.text;
        jr["messages"] = r.outgoing;
        if (r.sample) {
            jr["tokens"] = r.sample->tokens;
            jr["token_logprobs"] = r.sample->token_logprobs;
            jr["mean_logprob"] = r.sample->mean_logprob;
        }
        recs.push_back(std::move(jr));
    }
    j["records"] = std::move(recs);
    j["answer_raw"] = answer_raw;
    j["answer"] = answer_canonical;
    if (reward) j["reward"] = *reward;
    if (error) j["error"] = *error;
    return j.dump();
}

namespace {

TaskKind task_kind_for_footer(FooterKind footer) {
    switch (footer) {
        case FooterKind::multiple_choice: return TaskKind::multiple_choice;
        case FooterKind::yes_no: return TaskKind::yes_no;
        case FooterKind::code: return TaskKind::code;
        case FooterKind::none: return TaskKind::verbatim;
    }
    return TaskKind::verbatim;
}

/// Incoming messages for `addr`, assembled from the outgoing slots of the
/// previous layer's records (already in position order).
std::vector<Message> incoming_for(const Topology& topo, const std::vector<NodeRecord>& records,
                                  const NodeAddress& addr) {
    std::vector<Message> in;
    if (addr.is_output()) {
        if (topo.empty()) return in;
        for (const NodeRecord& r : records)
            if (!r.addr.is_output() && r.addr.layer == topo.depth())
                in.push_back(Message{r.addr, addr, r.outgoing.at(0)});
        return in;
    }
    if (addr.layer == 1) return in;
    for (const NodeRecord& r : records)
        if (!r.addr.is_output() && r.addr.layer == addr.layer - 1)
            in.push_back(Message{r.addr, addr, r.outgoing.at(static_cast<size_t>(addr.position - 1))});
    return in;
}

RenderedContext context_for(const Topology& topo, const std::string& task_input,
                            const std::vector<NodeRecord>& records, const NodeAddress& addr,
                            FooterKind footer, const std::string& code_prompt) {
    if (addr.is_output())
        return render_output_context(task_input, topo, incoming_for(topo, records, addr), footer,
                                     code_prompt);
    return render_hidden_context(task_input, topo, addr, incoming_for(topo, records, addr));
}

}  // namespace

Trace run_forward(const NodeSampler& sampler, const Topology& topo, const std::string& task_input,
                  const ForwardOptions& opts) {
    Trace trace;
    trace.episode = opts.episode;
    trace.topo = topo;
    trace.task_input = task_input;
    trace.mode = opts.mode;
    trace.seed = opts.seed;

    for (const NodeAddress& addr : topo.addresses()) {
        RenderedContext ctx =
            context_for(topo, task_input, trace.records, addr, opts.footer, opts.code_prompt);
        NodeGeneration gen = sampler(addr, ctx);
        ++trace.n_calls;

        NodeRecord rec;
        rec.addr = addr;
        rec.context = std::move(ctx);
        rec.context_tokens = std::move(gen.context_tokens);
        rec.sample = std::move(gen.sample);
        rec.text = std::move(gen.text);
        if (!addr.is_output()) rec.outgoing = parse_messages(rec.text, topo.recipients_of(addr));
        trace.records.push_back(std::move(rec));
    }

    trace.answer_raw = trace.records.back().text;
    trace.answer_canonical = canonicalize_answer(trace.answer_raw, opts.canonicalize_as);
    return trace;
}

namespace {

NodeSampler make_policy_sampler(const PolicySet& policies, uint64_t seed, uint64_t episode,
                                int max_tokens, DecodeMode mode) {
    return [&policies, seed, episode, max_tokens, mode](const NodeAddress& addr,
                                                        const RenderedContext& ctx) {
        std::mt19937_64 rng(derive_seed(seed, episode, addr.str()));
        NodeGeneration gen;
        gen.context_tokens = policies.vocab().tokenize(ctx.text);
        SampleResult res = policies.sample(addr, gen.context_tokens, rng, max_tokens, mode);
        gen.text = policies.vocab().text_of(res.tokens);
        gen.sample = std::move(res);
        return gen;
    };
}

}  // namespace

Trace forward(const PolicySet& policies, const Topology& topo, const std::string& task_input,
              uint64_t seed, uint64_t episode, DecodeMode mode, FooterKind footer, int max_tokens,
              const std::string& code_prompt) {
    for (const NodeAddress& addr : topo.addresses()) {
        if (!policies.has_node(addr))
            throw std::invalid_argument("forward: policy set has no delta for " + addr.str());
    }

    ForwardOptions opts;
    opts.footer = footer;
    opts.code_prompt = code_prompt;
    opts.canonicalize_as = task_kind_for_footer(footer);
    opts.episode = episode;
    opts.seed = seed;
    opts.mode = mode == DecodeMode::greedy ? "greedy" : "sample";
    return run_forward(make_policy_sampler(policies, seed, episode, max_tokens, mode), topo,
                       task_input, opts);
}

double trace_logprob(const Trace& trace, const PolicySet& policies) {
    double total = 0.0;
    for (const NodeRecord& rec : trace.records) {
        if (!rec.sample)
            throw std::invalid_argument("trace_logprob: trace lacks token records (remote mode?)");
        if (rec.context_tokens.empty() && !rec.context.text.empty())
            throw std::invalid_argument("trace_logprob: trace lacks context tokens");
        const std::vector<int>& toks = rec.sample->tokens;
        total += policies.mean_logprob(rec.addr, rec.context_tokens, toks) *
                 static_cast<double>(toks.size());
    }
    return total;
}

std::vector<TraceOutcome> enumerate_traces(const PolicySet& policies, const Topology& topo,
                                           const std::string& task_input, int max_tokens,
                                           FooterKind footer) {
    constexpr size_t kGuard = 100000;
    const Vocabulary& vocab = policies.vocab();
    const std::vector<NodeAddress> order = topo.addresses();

    std::vector<TraceOutcome> out;
    Trace partial;
    partial.topo = topo;
    partial.task_input = task_input;
    partial.mode = "enumerate";

    std::function<void(size_t, double)> rec_node = [&](size_t idx, double prob) {
        const NodeAddress addr = order[idx];
        RenderedContext ctx = context_for(topo, task_input, partial.records, addr, footer, "");
        std::vector<int> ctx_tokens = vocab.tokenize(ctx.text);

        for (const Outcome& oc : policies.enumerate_outcomes(addr, ctx_tokens, max_tokens)) {
            NodeRecord rec;
            rec.addr = addr;
            rec.context = ctx;
            rec.context_tokens = ctx_tokens;

            SampleResult sr;
            sr.tokens = oc.tokens;
            std::vector<int> state = ctx_tokens;
            for (int tok : oc.tokens) {
                auto lp = policies.log_probs(
                    addr, active_features(policies.feature_config(), vocab.size(), addr, state));
                sr.token_logprobs.push_back(lp[static_cast<size_t>(tok)]);
                state.push_back(tok);
            }
            sr.mean_logprob = sr.sum_logprob() / static_cast<double>(sr.tokens.size());
            rec.sample = std::move(sr);
            rec.text = vocab.text_of(oc.tokens);
            if (!addr.is_output()) rec.outgoing = parse_messages(rec.text, topo.recipients_of(addr));

            partial.records.push_back(std::move(rec));
            if (idx + 1 == order.size()) {
                if (out.size() >= kGuard)
                    throw std::invalid_argument(
                        "enumerate_traces: joint outcome count exceeds the 1e5 guard");
                Trace t = partial;
                t.answer_raw = t.records.back().text;
                t.answer_canonical = canonicalize_answer(t.answer_raw, task_kind_for_footer(footer));
                t.n_calls = static_cast<int>(t.records.size());
                out.push_back(TraceOutcome{std::move(t), prob * oc.probability});
            } else {
                rec_node(idx + 1, prob * oc.probability);
            }
            partial.records.pop_back();
        }
    };

    rec_node(0, 1.0);
    return out;
}

TraceLog::TraceLog(const std::string& path) : path_(path) {}

void TraceLog::append(const Trace& trace) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot append to trace log: " + path_);
    out << trace.to_json_line() << "\n";
}

}  // namespace neuromas
