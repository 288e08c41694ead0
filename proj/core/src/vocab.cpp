#include "neuromas/vocab.hpp"

#include <algorithm>
#include <stdexcept>

#include "neuromas/linalg.hpp"

namespace neuromas {

Vocabulary Vocabulary::from_alphabet(const std::string& alphabet) {
    if (alphabet.empty()) throw std::invalid_argument("Vocabulary: empty alphabet");
    Vocabulary v;
    v.tokens_.push_back("<eos>");
    for (char c : alphabet) {
        if (v.char_to_id_.count(c)) continue;
        v.char_to_id_[c] = static_cast<int>(v.tokens_.size());
        v.tokens_.push_back(std::string(1, c));
        v.alphabet_ += c;
    }
    if (v.size() < 2) throw std::invalid_argument("Vocabulary: needs at least one non-EOS token");
    return v;
}

std::vector<int> Vocabulary::tokenize(const std::string& text) const {
    std::vector<int> out;
    out.reserve(text.size());
    const int buckets = size() - 1;
    for (char c : text) {
        auto it = char_to_id_.find(c);
        if (it != char_to_id_.end()) {
            out.push_back(it->second);
        } else {
            uint64_t h = fnv1a64(std::string(1, c));
            out.push_back(1 + static_cast<int>(h % static_cast<uint64_t>(buckets)));
        }
    }
    return out;
}

std::string Vocabulary::text_of(const std::vector<int>& token_ids) const {
    std::string out;
    for (int id : token_ids) {
        if (id == eos_id()) continue;
        out += token(id);
    }
    return out;
}

int feature_dim(const FeatureConfig& fc, int vocab_size) {
    return fc.window * vocab_size + fc.layer_slots + fc.position_slots + 2;
}

std::vector<int> active_features(const FeatureConfig& fc, int vocab_size,
                                 const NodeAddress& addr, const std::vector<int>& state) {
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(fc.window) + 4);

    const int len = static_cast<int>(state.size());
    for (int slot = 0; slot < fc.window; ++slot) {
        int pos = len - fc.window + slot;
        if (pos < 0) continue;  // shorter-than-window states leave leading slots dark
        idx.push_back(slot * vocab_size + state[static_cast<size_t>(pos)]);
    }

    const int base = fc.window * vocab_size;
    if (addr.is_output()) {
        idx.push_back(base + fc.layer_slots + fc.position_slots);  // output flag
    } else {
        idx.push_back(base + std::min(addr.layer - 1, fc.layer_slots - 1));
        idx.push_back(base + fc.layer_slots + std::min(addr.position - 1, fc.position_slots - 1));
    }
    idx.push_back(base + fc.layer_slots + fc.position_slots + 1);  // bias
    return idx;
}

}  // namespace neuromas
