#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace neuromas {

/// Address of one node slot: a hidden node at (layer, position), both
/// 1-based, or the single output aggregation node.
struct NodeAddress {
    enum class Kind { hidden, output };
    Kind kind = Kind::output;
    int layer = 0;     // 1..L, hidden only
    int position = 0;  // 1..n_layer, hidden only

    static NodeAddress hidden(int layer, int position) {
        return NodeAddress{Kind::hidden, layer, position};
    }
    static NodeAddress output() { return NodeAddress{Kind::output, 0, 0}; }

    bool is_output() const { return kind == Kind::output; }

    /// Canonical string form: "L2P1" for hidden nodes, "OUT" for the
    /// output node. Used as checkpoint keys and rng stream labels.
    std::string str() const;

    static std::optional<NodeAddress> parse(const std::string& s);

    bool operator==(const NodeAddress& o) const {
        return kind == o.kind && layer == o.layer && position == o.position;
    }
    bool operator<(const NodeAddress& o) const {
        // hidden nodes in (layer, position) order, output node last
        auto key = [](const NodeAddress& a) {
            return a.is_output() ? std::pair<int, int>{1 << 20, 0}
                                 : std::pair<int, int>{a.layer, a.position};
        };
        return key(*this) < key(o);
    }
};

/// Layered fully connected feed-forward communication graph. `layers`
/// holds the hidden-layer widths; the output aggregation node is implicit
/// and always present. The empty layer list is the degenerate topology:
/// a single output node and no hidden structure.
class Topology {
public:
    Topology() = default;
    explicit Topology(std::vector<int> widths);

    static Topology single() { return Topology(); }

    const std::vector<int>& layers() const { return layers_; }
    int depth() const { return static_cast<int>(layers_.size()); }
    int width(int layer) const;          // 1-based
    int hidden_count() const;            // sum of widths
    bool empty() const { return layers_.empty(); }

    /// All node addresses in evaluation order: (1,1),(1,2),...,(L,n_L),OUT.
    std::vector<NodeAddress> addresses() const;
    std::vector<NodeAddress> layer_addresses(int layer) const;

    bool contains(const NodeAddress& addr) const;

    /// Number of downstream message slots a hidden node writes: the next
    /// layer's width, or 1 for the final hidden layer (the output node).
    int recipients_of(const NodeAddress& addr) const;

    /// Dash-joined width list ("2-2"); "[]" for the degenerate topology.
    std::string dash_string() const;
    /// Canonical serialized form "[2,2]".
    std::string canonical_string() const;

    bool operator==(const Topology& o) const { return layers_ == o.layers_; }

private:
    std::vector<int> layers_;
};

/// 1 + sum of hidden widths: model invocations per forward pass, and the
/// number of node-specific parameter deltas.
int call_count(const Topology& topo);

/// Parses "1-1", "[2,2,2]" or "[]" (degenerate). Widths must be positive.
Topology parse_topology(const std::string& spec);

/// How node identities transfer when `source` is expanded to `target`:
/// hidden (l,j) maps to (l,j) when the slot exists in both, the output
/// node maps to the output node, and remaining target slots are fresh.
struct InheritanceMap {
    Topology source;
    Topology target;
    std::vector<std::pair<NodeAddress, NodeAddress>> inherited;
    std::vector<NodeAddress> fresh;
};

/// Positional-prefix inheritance for a monotone expansion. Throws if any
/// shared layer narrows or the target has fewer layers.
InheritanceMap growth_map(const Topology& source, const Topology& target);

}  // namespace neuromas
