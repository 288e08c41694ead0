#include "neuromas/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "neuromas/linalg.hpp"

namespace neuromas {

using nlohmann::json;

double exact_match_reward(const std::string& gold, const std::string& answer) {
    if (answer == kNoAnswer) return 0.0;
    return gold == answer ? 1.0 : 0.0;
}

std::string StageSpec::name() const {
    switch (kind) {
        case StageKind::identity: return "id";
        case StageKind::add_const_mod10: return "add" + std::to_string(param);
        case StageKind::reverse: return "rev";
        case StageKind::positional_select: return "sel" + std::to_string(param);
        case StageKind::digit_sum_mod10: return "sum";
    }
    return "id";
}

StageSpec StageSpec::parse(const std::string& name) {
    if (name == "id") return {StageKind::identity, 0};
    if (name == "rev") return {StageKind::reverse, 0};
    if (name == "sum") return {StageKind::digit_sum_mod10, 0};
    if (name.rfind("add", 0) == 0) {
        int c = std::stoi(name.substr(3));
        if (c < 0 || c > 9) throw std::invalid_argument("stage addN: N must be 0..9, got " + name);
        return {StageKind::add_const_mod10, c};
    }
    if (name.rfind("sel", 0) == 0) {
        int k = std::stoi(name.substr(3));
        if (k < 1) throw std::invalid_argument("stage selK: K must be >= 1, got " + name);
        return {StageKind::positional_select, k};
    }
    throw std::invalid_argument("unknown stage '" + name + "'");
}

std::string PipelineTaskFamily::descriptor() const {
    std::string d;
    for (size_t i = 0; i < stages.size(); ++i) {
        if (i) d += '>';
        d += stages[i].name();
    }
    return d;
}

std::string PipelineTaskFamily::family_id() const {
    return "pipe[" + descriptor() + "]n" + std::to_string(input_len);
}

PipelineTaskFamily parse_pipeline_family(const std::vector<std::string>& stage_names, int input_len) {
    if (stage_names.empty()) throw std::invalid_argument("pipeline family: needs at least one stage");
    if (input_len < 1) throw std::invalid_argument("pipeline family: input_len must be >= 1");
    PipelineTaskFamily f;
    f.input_len = input_len;
    for (const std::string& s : stage_names) f.stages.push_back(StageSpec::parse(s));
    return f;
}

namespace {

// Reference evaluator used by the generator: stage-by-stage functional
// composition.
std::string apply_stage(const StageSpec& st, const std::string& s) {
    switch (st.kind) {
        case StageKind::identity:
            return s;
        case StageKind::add_const_mod10: {
            std::string out = s;
            for (char& c : out) c = static_cast<char>('0' + ((c - '0') + st.param) % 10);
            return out;
        }
        case StageKind::reverse: {
            std::string out = s;
            std::reverse(out.begin(), out.end());
            return out;
        }
        case StageKind::positional_select: {
            size_t k = static_cast<size_t>(std::min<int>(st.param, static_cast<int>(s.size())));
            return std::string(1, s[k - 1]);
        }
        case StageKind::digit_sum_mod10: {
            int sum = 0;
            for (char c : s) sum += c - '0';
            return std::string(1, static_cast<char>('0' + sum % 10));
        }
    }
    return s;
}

std::string reference_eval(const PipelineTaskFamily& family, const std::string& digits) {
    std::string cur = digits;
    for (const StageSpec& st : family.stages) cur = apply_stage(st, cur);
    return cur;
}

void check_digits(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("pipeline input: empty digit string");
    for (char c : s)
        if (c < '0' || c > '9')
            throw std::invalid_argument("pipeline input: non-digit character '" + std::string(1, c) + "'");
}

}  // namespace

TaskInstance generate_pipeline_instance(const PipelineTaskFamily& family, std::mt19937_64& rng) {
    std::string digits;
    for (int i = 0; i < family.input_len; ++i)
        digits += static_cast<char>('0' + static_cast<int>(rng() % 10));

    TaskInstance t;
    t.input = family.descriptor() + ":" + digits;
    t.gold = reference_eval(family, digits);
    t.kind = TaskKind::verbatim;
    t.family = family.family_id();
    t.id = t.family + ":" + digits;
    return t;
}

std::string pipeline_digits(const std::string& input) {
    auto at = input.rfind(':');
    return at == std::string::npos ? input : input.substr(at + 1);
}

// Independent evaluator: single pass over index-mapped digit values with
// table arithmetic, written separately from the generator's composed
// form.
std::string oracle_answer(const PipelineTaskFamily& family, const std::string& digits) {
    check_digits(digits);
    std::vector<int> vals;
    for (char c : digits) vals.push_back(c - '0');

    for (const StageSpec& st : family.stages) {
        switch (st.kind) {
            case StageKind::identity:
                break;
            case StageKind::add_const_mod10: {
                static const int wheel[20] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9,
                                              0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
                for (int& v : vals) v = wheel[v + st.param];
                break;
            }
            case StageKind::reverse: {
                std::vector<int> next(vals.size());
                for (size_t i = 0; i < vals.size(); ++i) next[vals.size() - 1 - i] = vals[i];
                vals = next;
                break;
            }
            case StageKind::positional_select: {
                size_t k = static_cast<size_t>(st.param);
                if (k > vals.size()) k = vals.size();
                vals = {vals[k - 1]};
                break;
            }
            case StageKind::digit_sum_mod10: {
                int acc = 0;
                for (int v : vals) acc = (acc + v) % 10;
                vals = {acc};
                break;
            }
        }
    }

    std::string out;
    for (int v : vals) out += static_cast<char>('0' + v);
    return out;
}

std::vector<TaskInstance> generate_pipeline_set(const PipelineTaskFamily& family, int count,
                                                uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed));
    std::vector<TaskInstance> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        TaskInstance t = generate_pipeline_instance(family, rng);
        t.id += "#" + std::to_string(i);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TaskInstance> load_task_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read task file: " + path);
    std::vector<TaskInstance> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, true);
        TaskInstance t;
        t.id = j.contains("id") ? j.at("id").get<std::string>() : std::to_string(lineno);
        t.input = j.at("input").get<std::string>();
        t.gold = j.at("gold").get<std::string>();
        t.kind = task_kind_from_string(j.value("task_kind", "verbatim"));
        out.push_back(std::move(t));
    }
    return out;
}

void save_task_file(const std::string& path, const std::vector<TaskInstance>& tasks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write task file: " + path);
    for (const TaskInstance& t : tasks) {
        json j{{"id", t.id}, {"input", t.input}, {"gold", t.gold},
               {"task_kind", task_kind_to_string(t.kind)}};
        out << j.dump() << "\n";
    }
}

}  // namespace neuromas
