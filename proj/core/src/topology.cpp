#include "neuromas/topology.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace neuromas {

std::string NodeAddress::str() const {
    if (is_output()) return "OUT";
    return "L" + std::to_string(layer) + "P" + std::to_string(position);
}

std::optional<NodeAddress> NodeAddress::parse(const std::string& s) {
    if (s == "OUT") return output();
    if (s.size() < 4 || s[0] != 'L') return std::nullopt;
    auto p = s.find('P');
    if (p == std::string::npos || p == 1 || p + 1 >= s.size()) return std::nullopt;
    int layer = 0, pos = 0;
    auto r1 = std::from_chars(s.data() + 1, s.data() + p, layer);
    auto r2 = std::from_chars(s.data() + p + 1, s.data() + s.size(), pos);
    if (r1.ec != std::errc{} || r1.ptr != s.data() + p) return std::nullopt;
    if (r2.ec != std::errc{} || r2.ptr != s.data() + s.size()) return std::nullopt;
    if (layer < 1 || pos < 1) return std::nullopt;
    return hidden(layer, pos);
}

Topology::Topology(std::vector<int> widths) : layers_(std::move(widths)) {
    for (int w : layers_) {
        if (w < 1) throw std::invalid_argument("Topology: layer width must be >= 1, got " + std::to_string(w));
    }
}

int Topology::width(int layer) const {
    if (layer < 1 || layer > depth()) throw std::out_of_range("Topology::width: layer " + std::to_string(layer));
    return layers_[static_cast<size_t>(layer) - 1];
}

int Topology::hidden_count() const {
    int n = 0;
    for (int w : layers_) n += w;
    return n;
}

std::vector<NodeAddress> Topology::addresses() const {
    std::vector<NodeAddress> out;
    out.reserve(static_cast<size_t>(hidden_count()) + 1);
    for (int l = 1; l <= depth(); ++l)
        for (int j = 1; j <= width(l); ++j) out.push_back(NodeAddress::hidden(l, j));
    out.push_back(NodeAddress::output());
    return out;
}

std::vector<NodeAddress> Topology::layer_addresses(int layer) const {
    std::vector<NodeAddress> out;
    for (int j = 1; j <= width(layer); ++j) out.push_back(NodeAddress::hidden(layer, j));
    return out;
}

bool Topology::contains(const NodeAddress& addr) const {
    if (addr.is_output()) return true;
    return addr.layer >= 1 && addr.layer <= depth() && addr.position >= 1 &&
           addr.position <= width(addr.layer);
}

int Topology::recipients_of(const NodeAddress& addr) const {
    if (addr.is_output()) throw std::invalid_argument("recipients_of: output node has no recipients");
    if (!contains(addr)) throw std::invalid_argument("recipients_of: address " + addr.str() + " not in topology");
    return addr.layer == depth() ? 1 : width(addr.layer + 1);
}

std::string Topology::dash_string() const {
    if (layers_.empty()) return "[]";
    std::string s;
    for (size_t i = 0; i < layers_.size(); ++i) {
        if (i) s += '-';
        s += std::to_string(layers_[i]);
    }
    return s;
}

std::string Topology::canonical_string() const {
    std::string s = "[";
    for (size_t i = 0; i < layers_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(layers_[i]);
    }
    return s + "]";
}

int call_count(const Topology& topo) {
    return 1 + topo.hidden_count();
}

namespace {

int parse_width_token(const std::string& tok) {
    if (tok.empty()) throw std::invalid_argument("parse_topology: empty width token");
    int v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
        throw std::invalid_argument("parse_topology: malformed width token '" + tok + "'");
    if (v < 1) throw std::invalid_argument("parse_topology: width must be >= 1, got '" + tok + "'");
    return v;
}

}  // namespace

Topology parse_topology(const std::string& spec) {
    std::string s = spec;
    // trim
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    if (s.empty()) throw std::invalid_argument("parse_topology: empty spec");

    char sep = '-';
    if (s.front() == '[') {
        if (s.back() != ']') throw std::invalid_argument("parse_topology: unbalanced brackets in '" + spec + "'");
        s = s.substr(1, s.size() - 2);
        sep = ',';
        if (s.empty()) return Topology::single();  // "[]" is the explicit degenerate topology
    }

    std::vector<int> widths;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, sep)) {
        while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
        while (!tok.empty() && tok.back() == ' ') tok.pop_back();
        widths.push_back(parse_width_token(tok));
    }
    if (widths.empty()) throw std::invalid_argument("parse_topology: no widths in '" + spec + "'");
    return Topology(std::move(widths));
}

InheritanceMap growth_map(const Topology& source, const Topology& target) {
    if (target.depth() < source.depth())
        throw std::invalid_argument("growth_map: target has fewer layers (" + target.canonical_string() +
                                    " < " + source.canonical_string() + ")");
    for (int l = 1; l <= source.depth(); ++l) {
        if (target.width(l) < source.width(l))
            throw std::invalid_argument("growth_map: layer " + std::to_string(l) + " narrows from " +
                                        std::to_string(source.width(l)) + " to " +
                                        std::to_string(target.width(l)));
    }

    InheritanceMap map;
    map.source = source;
    map.target = target;
    for (const NodeAddress& addr : target.addresses()) {
        if (source.contains(addr)) {
            map.inherited.emplace_back(addr, addr);
        } else {
            map.fresh.push_back(addr);
        }
    }
    return map;
}

}  // namespace neuromas
