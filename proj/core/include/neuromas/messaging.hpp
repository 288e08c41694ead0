#pragma once

#include <string>
#include <vector>

#include "neuromas/topology.hpp"

namespace neuromas {

/// Answer-format footer appended to the output-node (and summarizer)
/// context. `none` omits the footer block entirely.
enum class FooterKind { multiple_choice, yes_no, code, none };

FooterKind footer_from_string(const std::string& s);
std::string footer_to_string(FooterKind f);

/// Exact footer bytes. `code_prompt` is only consulted for FooterKind::code
/// (the function signature the completion should continue).
std::string render_footer(FooterKind kind, const std::string& code_prompt = "");

/// Text payload routed along one topology edge.
struct Message {
    NodeAddress sender;
    NodeAddress recipient;
    std::string text;
};

/// A fully instantiated node prompt.
struct RenderedContext {
    NodeAddress node;
    std::string text;
    FooterKind footer = FooterKind::none;
};

/// Prompt for hidden node `addr`: header, problem, incoming messages from
/// the previous layer (omitted for layer 1), and one "TO #k" format slot
/// per downstream recipient. Byte-deterministic.
RenderedContext render_hidden_context(const std::string& task_input, const Topology& topo,
                                      const NodeAddress& addr,
                                      const std::vector<Message>& incoming);

/// Prompt for the output aggregation node from the final-layer messages
/// (exactly one per final-layer node, in position order).
RenderedContext render_output_context(const std::string& task_input, const Topology& topo,
                                      const std::vector<Message>& finals, FooterKind footer,
                                      const std::string& code_prompt = "");

/// Prompt for the optional summarizer: lists every hidden node's raw
/// output in (layer, position) order. Not wired into the default forward
/// pass; exposed for callers that aggregate outside the output node.
RenderedContext render_summarizer_context(const std::string& task_input, const Topology& topo,
                                          const std::vector<std::string>& all_node_outputs,
                                          FooterKind footer, const std::string& code_prompt = "");

/// Splits generated text into exactly `n_recipients` payloads on "TO #k:"
/// markers (k in 1..n_recipients, anywhere in the text; first marker per
/// slot wins, payloads truncate at the next marker). Total: if no marker
/// is present the whole trimmed text goes to recipient 1 and the rest are
/// empty.
std::vector<std::string> parse_messages(const std::string& generated, int n_recipients);

/// Single-recipient parse: the message a final-layer node sends to the
/// output node.
std::string parse_final_message(const std::string& generated);

/// Task kinds for answer canonicalization.
enum class TaskKind { multiple_choice, yes_no, code, verbatim };

TaskKind task_kind_from_string(const std::string& s);
std::string task_kind_to_string(TaskKind k);
FooterKind footer_for_task(TaskKind k);

/// Distinguished canonical value meaning "no answer could be extracted".
/// Never matches any gold answer.
extern const std::string kNoAnswer;

/// Canonicalizes a raw generation into the expected answer format:
///   multiple_choice -> first standalone A/B/C/D after the last "Answer"
///                      marker (whole text when no marker), uppercased;
///   yes_no          -> "Yes"/"No" by first standalone case-insensitive hit;
///   code            -> text after "Provide the function body:" when
///                      present, dedented;
///   verbatim        -> trimmed text.
/// Returns kNoAnswer when no pattern matches (multiple_choice / yes_no).
std::string canonicalize_answer(const std::string& generated, TaskKind kind);

}  // namespace neuromas
