#include "neuromas/messaging.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace neuromas {

const std::string kNoAnswer = "__NO_ANSWER__";

FooterKind footer_from_string(const std::string& s) {
    if (s == "multiple-choice") return FooterKind::multiple_choice;
    if (s == "yes-no") return FooterKind::yes_no;
    if (s == "code") return FooterKind::code;
    if (s == "none") return FooterKind::none;
    throw std::invalid_argument("unknown footer kind '" + s + "'");
}

std::string footer_to_string(FooterKind f) {
    switch (f) {
        case FooterKind::multiple_choice: return "multiple-choice";
        case FooterKind::yes_no: return "yes-no";
        case FooterKind::code: return "code";
        case FooterKind::none: return "none";
    }
    return "none";
}

std::string render_footer(FooterKind kind, const std::string& code_prompt) {
    switch (kind) {
        case FooterKind::multiple_choice:
            return "Answer with A, B, C, or D.\nAnswer:";
        case FooterKind::yes_no:
            return "Answer Yes or No.\nAnswer:";
        case FooterKind::code:
            return "Provide the function body:\n" + code_prompt;
        case FooterKind::none:
            return "";
    }
    return "";
}

namespace {

void append_network_header_tail(std::string& out, const Topology& topo) {
    out += "Network: ";
    out += std::to_string(topo.depth());
    out += "-layer ";
    out += topo.dash_string();
    out += ",";
}

std::string trim_copy(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

RenderedContext render_hidden_context(const std::string& task_input, const Topology& topo,
                                      const NodeAddress& addr,
                                      const std::vector<Message>& incoming) {
    if (addr.is_output() || !topo.contains(addr))
        throw std::invalid_argument("render_hidden_context: invalid address " + addr.str());

    const int expected = addr.layer == 1 ? 0 : topo.width(addr.layer - 1);
    if (static_cast<int>(incoming.size()) != expected)
        throw std::invalid_argument("render_hidden_context: node " + addr.str() + " expects " +
                                    std::to_string(expected) + " incoming messages, got " +
                                    std::to_string(incoming.size()));

    std::string out = "[";
    append_network_header_tail(out, topo);
    out += " ";
    out += std::to_string(topo.hidden_count());
    out += " nodes |\n Layer ";
    out += std::to_string(addr.layer);
    out += "/";
    out += std::to_string(topo.depth());
    out += ", Position ";
    out += std::to_string(addr.position);
    out += "/";
    out += std::to_string(topo.width(addr.layer));
    out += "]\n\nPROBLEM:\n";
    out += task_input;

    if (addr.layer > 1) {
        out += "\n\nPREVIOUS:";
        for (int k = 0; k < expected; ++k) {
            out += "\n[from L";
            out += std::to_string(addr.layer - 1);
            out += "P";
            out += std::to_string(k + 1);
            out += "]: ";
            out += incoming[static_cast<size_t>(k)].text;
        }
    }

    out += "\n\nWrite a private message to each downstream node.\nUse exactly this format:\n";
    const int slots = topo.recipients_of(addr);
    for (int k = 1; k <= slots; ++k) {
        out += "\nTO #";
        out += std::to_string(k);
        out += ": <message for downstream node ";
        out += std::to_string(k);
        out += ">";
    }

    return RenderedContext{addr, std::move(out), FooterKind::none};
}

RenderedContext render_output_context(const std::string& task_input, const Topology& topo,
                                      const std::vector<Message>& finals, FooterKind footer,
                                      const std::string& code_prompt) {
    const int expected = topo.empty() ? 0 : topo.width(topo.depth());
    if (static_cast<int>(finals.size()) != expected)
        throw std::invalid_argument("render_output_context: expected " + std::to_string(expected) +
                                    " final messages, got " + std::to_string(finals.size()));

    std::string out = "[Output node | ";
    append_network_header_tail(out, topo);
    out += "\n ";
    out += std::to_string(topo.hidden_count());
    out += " hidden nodes]\n\nPROBLEM:\n";
    out += task_input;

    if (expected > 0) {
        out += "\n\nPREVIOUS:";
        for (int j = 0; j < expected; ++j) {
            out += "\n[from L";
            out += std::to_string(topo.depth());
            out += "P";
            out += std::to_string(j + 1);
            out += "]: ";
            out += finals[static_cast<size_t>(j)].text;
        }
    }

    if (footer != FooterKind::none) {
        out += "\n\n";
        out += render_footer(footer, code_prompt);
    }

    return RenderedContext{NodeAddress::output(), std::move(out), footer};
}

RenderedContext render_summarizer_context(const std::string& task_input, const Topology& topo,
                                          const std::vector<std::string>& all_node_outputs,
                                          FooterKind footer, const std::string& code_prompt) {
    if (static_cast<int>(all_node_outputs.size()) != topo.hidden_count() || all_node_outputs.empty())
        throw std::invalid_argument("render_summarizer_context: expected " +
                                    std::to_string(topo.hidden_count()) + " node outputs, got " +
                                    std::to_string(all_node_outputs.size()));

    std::string out = "[Summarizer | ";
    append_network_header_tail(out, topo);
    out += "\n ";
    out += std::to_string(topo.hidden_count());
    out += " hidden nodes total]\n\nPROBLEM:\n";
    out += task_input;

    out += "\n\nALL OUTPUTS:";
    for (size_t i = 0; i < all_node_outputs.size(); ++i) {
        out += "\n[N";
        out += std::to_string(i + 1);
        out += "]: ";
        out += all_node_outputs[i];
    }

    if (footer != FooterKind::none) {
        out += "\n\n";
        out += render_footer(footer, code_prompt);
    }

    return RenderedContext{NodeAddress::output(), std::move(out), footer};
}

namespace {

/// Scans for the next well-formed marker "TO #k:" with 1 <= k <= n at or
/// after `pos`. Returns npos if none; otherwise sets k, the marker start,
/// and the payload start (just past the colon).
size_t find_marker(const std::string& text, size_t pos, int n, int& k_out, size_t& payload_start) {
    while (true) {
        size_t at = text.find("TO #", pos);
        if (at == std::string::npos) return std::string::npos;
        size_t digits = at + 4;
        size_t end = digits;
        while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
        if (end > digits && end < text.size() && text[end] == ':') {
            int k = 0;
            auto r = std::from_chars(text.data() + digits, text.data() + end, k);
            if (r.ec == std::errc{} && k >= 1 && k <= n) {
                k_out = k;
                payload_start = end + 1;
                return at;
            }
        }
        pos = at + 4;
    }
}

}  // namespace

std::vector<std::string> parse_messages(const std::string& generated, int n_recipients) {
    if (n_recipients < 1) throw std::invalid_argument("parse_messages: n_recipients must be >= 1");

    std::vector<std::string> slots(static_cast<size_t>(n_recipients));
    std::vector<bool> seen(static_cast<size_t>(n_recipients), false);

    int k = 0;
    size_t payload_start = 0;
    size_t at = find_marker(generated, 0, n_recipients, k, payload_start);
    if (at == std::string::npos) {
        slots[0] = trim_copy(generated);
        return slots;
    }

    while (at != std::string::npos) {
        int next_k = 0;
        size_t next_payload = 0;
        size_t next_at = find_marker(generated, payload_start, n_recipients, next_k, next_payload);
        size_t payload_end = next_at == std::string::npos ? generated.size() : next_at;
        if (!seen[static_cast<size_t>(k - 1)]) {
            slots[static_cast<size_t>(k - 1)] =
                trim_copy(generated.substr(payload_start, payload_end - payload_start));
            seen[static_cast<size_t>(k - 1)] = true;
        }
        at = next_at;
        k = next_k;
        payload_start = next_payload;
    }
    return slots;
}

std::string parse_final_message(const std::string& generated) {
    return parse_messages(generated, 1)[0];
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "multiple-choice") return TaskKind::multiple_choice;
    if (s == "yes-no") return TaskKind::yes_no;
    if (s == "code") return TaskKind::code;
    if (s == "verbatim") return TaskKind::verbatim;
    throw std::invalid_argument("unknown task kind '" + s + "'");
}

std::string task_kind_to_string(TaskKind k) {
    switch (k) {
        case TaskKind::multiple_choice: return "multiple-choice";
        case TaskKind::yes_no: return "yes-no";
        case TaskKind::code: return "code";
        case TaskKind::verbatim: return "verbatim";
    }
    return "verbatim";
}

FooterKind footer_for_task(TaskKind k) {
    switch (k) {
        case TaskKind::multiple_choice: return FooterKind::multiple_choice;
        case TaskKind::yes_no: return FooterKind::yes_no;
        case TaskKind::code: return FooterKind::code;
        case TaskKind::verbatim: return FooterKind::none;
    }
    return FooterKind::none;
}

namespace {

bool alnum_at(const std::string& s, size_t i) {
    return i < s.size() && std::isalnum(static_cast<unsigned char>(s[i]));
}

bool standalone_at(const std::string& s, size_t pos, size_t len) {
    if (pos > 0 && alnum_at(s, pos - 1)) return false;
    if (alnum_at(s, pos + len)) return false;
    return true;
}

bool iequal_at(const std::string& s, size_t pos, const std::string& word) {
    if (pos + word.size() > s.size()) return false;
    for (size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) !=
            std::tolower(static_cast<unsigned char>(word[i])))
            return false;
    }
    return true;
}

std::string canonicalize_multiple_choice(const std::string& text) {
    size_t start = 0;
    size_t marker = text.rfind("Answer");
    if (marker != std::string::npos) start = marker + 6;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if ((u == 'A' || u == 'B' || u == 'C' || u == 'D') && standalone_at(text, i, 1)) {
            return std::string(1, u);
        }
    }
    return kNoAnswer;
}

std::string canonicalize_yes_no(const std::string& text) {
    for (size_t i = 0; i < text.size(); ++i) {
        if (iequal_at(text, i, "yes") && standalone_at(text, i, 3)) return "Yes";
        if (iequal_at(text, i, "no") && standalone_at(text, i, 2)) return "No";
    }
    return kNoAnswer;
}

std::string dedent(const std::string& text) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in(text);
    size_t common = std::numeric_limits<size_t>::max();
    while (std::getline(in, line)) {
        lines.push_back(line);
        std::string t = trim_copy(line);
        if (t.empty()) continue;
        size_t indent = 0;
        while (indent < line.size() &&
               (line[indent] == ' ' || line[indent] == '\t'))
            ++indent;
        common = std::min(common, indent);
    }
    if (common == std::numeric_limits<size_t>::max()) common = 0;
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i].size() >= common ? lines[i].substr(common) : std::string();
    }
    return out;
}

std::string canonicalize_code(const std::string& text) {
    static const std::string footer = "Provide the function body:";
    size_t at = text.find(footer);
    std::string body = at == std::string::npos ? text : text.substr(at + footer.size());
    while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.erase(body.begin());
    while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
    return dedent(body);
}

}  // namespace

std::string canonicalize_answer(const std::string& generated, TaskKind kind) {
    switch (kind) {
        case TaskKind::multiple_choice: return canonicalize_multiple_choice(generated);
        case TaskKind::yes_no: return canonicalize_yes_no(generated);
        case TaskKind::code: return canonicalize_code(generated);
        case TaskKind::verbatim: return trim_copy(generated);
    }
    throw std::invalid_argument("canonicalize_answer: unknown task kind");
}

}  // namespace neuromas
