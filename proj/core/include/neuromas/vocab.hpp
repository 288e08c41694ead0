#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "neuromas/topology.hpp"

namespace neuromas {

/// Symbol-level token vocabulary. Token 0 is always the reserved
/// end-of-sequence symbol; all other tokens are single characters drawn
/// from a task alphabet.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Builds {EOS} + one token per distinct character of `alphabet`.
    static Vocabulary from_alphabet(const std::string& alphabet);

    int size() const { return static_cast<int>(tokens_.size()); }
    int eos_id() const { return 0; }
    const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& alphabet() const { return alphabet_; }

    /// Character-level mapping of arbitrary text: in-alphabet characters
    /// map to their own tokens, everything else is hash-bucketed into a
    /// non-EOS token id so foreign template bytes still contribute
    /// deterministic features.
    std::vector<int> tokenize(const std::string& text) const;

    /// Concatenated token strings, EOS excluded.
    std::string text_of(const std::vector<int>& token_ids) const;

    bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::string alphabet_;
    std::unordered_map<char, int> char_to_id_;
};

/// Featurization knobs for the built-in policy: how many trailing tokens
/// the logit map can see, and how many layer/position slots the
/// structural tag distinguishes before clamping.
struct FeatureConfig {
    int window = 48;
    int layer_slots = 4;
    int position_slots = 4;

    bool operator==(const FeatureConfig& o) const {
        return window == o.window && layer_slots == o.layer_slots &&
               position_slots == o.position_slots;
    }
};

/// Dimension of the binary feature vector: one indicator per (window
/// slot, token) pair, the structural tag one-hots, an output-node flag
/// and a bias.
int feature_dim(const FeatureConfig& fc, int vocab_size);

/// Indices of the active (value 1) features for a node looking at the
/// trailing window of `state`. The last state token always lands in the
/// last window slot, so offsets are stable relative to the sequence end.
std::vector<int> active_features(const FeatureConfig& fc, int vocab_size,
                                 const NodeAddress& addr, const std::vector<int>& state);

}  // namespace neuromas
