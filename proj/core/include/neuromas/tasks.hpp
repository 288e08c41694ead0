#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "neuromas/messaging.hpp"

namespace neuromas {

/// One scored example. `gold` is already canonical.
struct TaskInstance {
    std::string id;
    std::string input;
    std::string gold;
    TaskKind kind = TaskKind::verbatim;
    std::string family;
};

/// Terminal exact-match reward: 1 iff byte equality; the NO_ANSWER
/// sentinel never matches.
double exact_match_reward(const std::string& gold, const std::string& answer);

/// Primitive transforms over digit strings, closed over the digit
/// alphabet.
enum class StageKind {
    identity,
    add_const_mod10,   // per digit: (d + c) % 10
    reverse,
    positional_select, // keep digit at 1-based position c (clamped to length)
    digit_sum_mod10,   // whole string collapses to one digit
};

struct StageSpec {
    StageKind kind = StageKind::identity;
    int param = 0;

    std::string name() const;
    static StageSpec parse(const std::string& name);
};

/// Composition of K digit-string stages applied to uniformly random
/// inputs of length `input_len`.
struct PipelineTaskFamily {
    std::vector<StageSpec> stages;
    int input_len = 1;

    int K() const { return static_cast<int>(stages.size()); }
    std::string descriptor() const;  // "add3>rev", stable per family
    std::string family_id() const;
};

PipelineTaskFamily parse_pipeline_family(const std::vector<std::string>& stage_names, int input_len);

/// Samples digits uniformly and computes the gold answer with the
/// family's reference evaluator. Input format: "<descriptor>:<digits>".
TaskInstance generate_pipeline_instance(const PipelineTaskFamily& family, std::mt19937_64& rng);

/// Second, independently written evaluator used to cross-check the
/// generator. Throws on non-digit input.
std::string oracle_answer(const PipelineTaskFamily& family, const std::string& digits);

/// Digits part of a pipeline input ("add3>rev:82" -> "82").
std::string pipeline_digits(const std::string& input);

std::vector<TaskInstance> generate_pipeline_set(const PipelineTaskFamily& family, int count,
                                                uint64_t seed);

/// JSON-lines task file: one object per line with fields
/// {id, input, gold, task_kind}.
std::vector<TaskInstance> load_task_file(const std::string& path);
void save_task_file(const std::string& path, const std::vector<TaskInstance>& tasks);

}  // namespace neuromas
