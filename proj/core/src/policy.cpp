#include "neuromas/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace neuromas {

using nlohmann::json;

double gradient_set_norm(const GradientSet& grads) {
    double s = 0.0;
    for (const auto& [addr, g] : grads) s += g.sq_norm();
    return std::sqrt(s);
}

PolicySet PolicySet::make(const Vocabulary& vocab, const FeatureConfig& fc, int rank,
                          const Topology& topo, const BaseInit& base_init, uint64_t init_seed) {
    if (vocab.size() < 2) throw std::invalid_argument("PolicySet: vocabulary too small");
    if (rank < 0) throw std::invalid_argument("PolicySet: negative rank");
    if (fc.window < 1 || fc.layer_slots < 1 || fc.position_slots < 1)
        throw std::invalid_argument("PolicySet: invalid feature config");

    PolicySet p;
    p.vocab_ = vocab;
    p.fc_ = fc;
    p.rank_ = rank;
    p.topo_ = topo;
    p.init_seed_ = init_seed;

    const int m = vocab.size();
    const int d = feature_dim(fc, m);
    if (base_init.kind == BaseInit::Kind::zeros) {
        p.base_ = Matrix(m, d);
    } else {
        std::mt19937_64 rng(splitmix64(base_init.seed));
        p.base_ = randn_matrix(m, d, base_init.scale, rng);
    }

    for (const NodeAddress& addr : topo.addresses()) p.deltas_[addr] = p.fresh_delta(addr);
    return p;
}

const NodeDelta& PolicySet::delta(const NodeAddress& addr) const {
    auto it = deltas_.find(addr);
    if (it == deltas_.end()) throw std::invalid_argument("PolicySet: unknown node " + addr.str());
    return it->second;
}

NodeDelta& PolicySet::delta_mut(const NodeAddress& addr) {
    auto it = deltas_.find(addr);
    if (it == deltas_.end()) throw std::invalid_argument("PolicySet: unknown node " + addr.str());
    return it->second;
}

NodeDelta PolicySet::fresh_delta(const NodeAddress& addr) const {
    const int m = vocab_.size();
    const int d = dim();
    NodeDelta nd;
    std::mt19937_64 rng(derive_seed(init_seed_, 0, "delta-init:" + addr.str()));
    nd.A = randn_matrix(rank_, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    nd.B = Matrix(m, rank_);  // inactive: contributes nothing until trained
    return nd;
}

std::vector<double> PolicySet::logits(const NodeAddress& addr, const std::vector<int>& active) const {
    const NodeDelta& nd = delta(addr);
    const int m = vocab_.size();
    std::vector<double> out(static_cast<size_t>(m), 0.0);

    for (int f : active)
        for (int c = 0; c < m; ++c) out[static_cast<size_t>(c)] += base_(c, f);

    if (rank_ > 0) {
        std::vector<double> u(static_cast<size_t>(rank_), 0.0);
        for (int f : active)
            for (int i = 0; i < rank_; ++i) u[static_cast<size_t>(i)] += nd.A(i, f);
        for (int c = 0; c < m; ++c) {
            double acc = 0.0;
            for (int i = 0; i < rank_; ++i) acc += nd.B(c, i) * u[static_cast<size_t>(i)];
            out[static_cast<size_t>(c)] += acc;
        }
    }
    return out;
}

namespace {

void log_softmax_inplace(std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    double lse = mx + std::log(sum);
    for (double& x : v) x -= lse;
}

}  // namespace

std::vector<double> PolicySet::log_probs(const NodeAddress& addr, const std::vector<int>& active) const {
    std::vector<double> v = logits(addr, active);
    log_softmax_inplace(v);
    return v;
}

SampleResult PolicySet::sample(const NodeAddress& addr, const std::vector<int>& context,
                               std::mt19937_64& rng, int max_tokens, DecodeMode mode) const {
    if (max_tokens < 1) throw std::invalid_argument("sample: max_tokens must be >= 1");
    if (!has_node(addr)) throw std::invalid_argument("sample: unknown node " + addr.str());

    const int m = vocab_.size();
    SampleResult res;
    std::vector<int> state = context;

    for (int step = 0; step < max_tokens; ++step) {
        std::vector<double> lp = log_probs(addr, active_features(fc_, m, addr, state));

        int chosen = 0;
        if (mode == DecodeMode::greedy) {
            for (int c = 1; c < m; ++c)
                if (lp[static_cast<size_t>(c)] > lp[static_cast<size_t>(chosen)]) chosen = c;
        } else {
            double u = uniform01(rng);
            double cum = 0.0;
            chosen = m - 1;  // guards against floating residue at the top end
            for (int c = 0; c < m; ++c) {
                cum += std::exp(lp[static_cast<size_t>(c)]);
                if (u < cum) {
                    chosen = c;
                    break;
                }
            }
        }

        res.tokens.push_back(chosen);
        res.token_logprobs.push_back(lp[static_cast<size_t>(chosen)]);
        state.push_back(chosen);
        if (chosen == vocab_.eos_id()) break;
    }

    res.mean_logprob = res.sum_logprob() / static_cast<double>(res.tokens.size());
    return res;
}

double PolicySet::mean_logprob(const NodeAddress& addr, const std::vector<int>& context,
                               const std::vector<int>& tokens) const {
    if (tokens.empty()) throw std::invalid_argument("mean_logprob: empty token sequence");
    const int m = vocab_.size();

    double sum = 0.0;
    std::vector<int> state = context;
    for (int tok : tokens) {
        if (tok < 0 || tok >= m)
            throw std::invalid_argument("mean_logprob: token id " + std::to_string(tok) +
                                        " outside vocabulary");
        std::vector<double> lp = log_probs(addr, active_features(fc_, m, addr, state));
        sum += lp[static_cast<size_t>(tok)];
        state.push_back(tok);
    }
    return sum / static_cast<double>(tokens.size());
}

DeltaGrad PolicySet::zero_grad() const {
    DeltaGrad g;
    g.dA = Matrix(rank_, dim());
    g.dB = Matrix(vocab_.size(), rank_);
    return g;
}

DeltaGrad PolicySet::grad_logprob(const NodeAddress& addr, const std::vector<int>& context,
                                  const std::vector<int>& tokens, LogprobNorm norm) const {
    if (tokens.empty()) throw std::invalid_argument("grad_logprob: empty token sequence");
    const NodeDelta& nd = delta(addr);
    const int m = vocab_.size();
    const double w = norm == LogprobNorm::mean ? 1.0 / static_cast<double>(tokens.size()) : 1.0;

    DeltaGrad g = zero_grad();
    std::vector<int> state = context;

    for (int tok : tokens) {
        if (tok < 0 || tok >= m)
            throw std::invalid_argument("grad_logprob: token id outside vocabulary");
        std::vector<int> active = active_features(fc_, m, addr, state);
        std::vector<double> lp = log_probs(addr, active);

        // residual rho = onehot(tok) - softmax; dW_eff = rho x^T
        std::vector<double> rho(static_cast<size_t>(m));
        for (int c = 0; c < m; ++c) rho[static_cast<size_t>(c)] = -std::exp(lp[static_cast<size_t>(c)]);
        rho[static_cast<size_t>(tok)] += 1.0;

        if (rank_ > 0) {
            std::vector<double> u(static_cast<size_t>(rank_), 0.0);
            for (int f : active)
                for (int i = 0; i < rank_; ++i) u[static_cast<size_t>(i)] += nd.A(i, f);

            // dB += w * rho u^T
            for (int c = 0; c < m; ++c)
                for (int i = 0; i < rank_; ++i) g.dB(c, i) += w * rho[static_cast<size_t>(c)] * u[static_cast<size_t>(i)];

            // dA[:, f] += w * B^T rho for each active f
            std::vector<double> btr(static_cast<size_t>(rank_), 0.0);
            for (int i = 0; i < rank_; ++i) {
                double acc = 0.0;
                for (int c = 0; c < m; ++c) acc += nd.B(c, i) * rho[static_cast<size_t>(c)];
                btr[static_cast<size_t>(i)] = acc;
            }
            for (int f : active)
                for (int i = 0; i < rank_; ++i) g.dA(i, f) += w * btr[static_cast<size_t>(i)];
        }

        state.push_back(tok);
    }
    return g;
}

DeltaGrad PolicySet::grad_mean_logprob(const NodeAddress& addr, const std::vector<int>& context,
                                       const std::vector<int>& tokens) const {
    return grad_logprob(addr, context, tokens, LogprobNorm::mean);
}

long long PolicySet::param_count(ParamScope scope) const {
    const long long per_node = static_cast<long long>(rank_) * (dim() + vocab_.size());
    if (scope == ParamScope::per_node) return per_node;
    return per_node * static_cast<long long>(call_count(topo_));
}

std::vector<Outcome> PolicySet::enumerate_outcomes(const NodeAddress& addr,
                                                   const std::vector<int>& context,
                                                   int max_tokens) const {
    if (max_tokens < 1) throw std::invalid_argument("enumerate_outcomes: max_tokens must be >= 1");
    const int m = vocab_.size();
    double bound = std::pow(static_cast<double>(m), static_cast<double>(max_tokens));
    if (bound > 1e5)
        throw std::invalid_argument("enumerate_outcomes: |V|^max_tokens = " + std::to_string(bound) +
                                    " exceeds the 1e5 enumeration guard");

    std::vector<Outcome> out;
    std::vector<int> state = context;
    std::vector<int> prefix;

    // depth-first walk; a sequence ends at EOS or at the cap (cylinder mass)
    std::function<void(double)> rec = [&](double prob) {
        std::vector<double> lp = log_probs(addr, active_features(fc_, m, addr, state));
        for (int c = 0; c < m; ++c) {
            double p = prob * std::exp(lp[static_cast<size_t>(c)]);
            prefix.push_back(c);
            state.push_back(c);
            if (c == vocab_.eos_id() || static_cast<int>(prefix.size()) == max_tokens) {
                out.push_back(Outcome{prefix, p});
            } else {
                rec(p);
            }
            prefix.pop_back();
            state.pop_back();
        }
    };
    rec(1.0);
    return out;
}

namespace {

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
    Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != static_cast<size_t>(m.rows) * static_cast<size_t>(m.cols))
        throw std::runtime_error("checkpoint: matrix payload size mismatch");
    return m;
}

}  // namespace

std::string PolicySet::to_json(const std::map<std::string, double>& extra) const {
    json j;
    j["format_version"] = 1;
    j["alphabet"] = vocab_.alphabet();
    j["feature_config"] = {{"window", fc_.window},
                           {"layer_slots", fc_.layer_slots},
                           {"position_slots", fc_.position_slots}};
    j["rank"] = rank_;
    j["init_seed"] = init_seed_;
    j["topology"] = topo_.canonical_string();
    j["base"] = matrix_to_json(base_);
    json deltas = json::object();
    for (const auto& [addr, nd] : deltas_) {
        deltas[addr.str()] = {{"A", matrix_to_json(nd.A)}, {"B", matrix_to_json(nd.B)}};
    }
    j["deltas"] = deltas;
    if (!extra.empty()) j["extra"] = extra;
    return j.dump();
}

PolicySet PolicySet::from_json(const std::string& text, std::map<std::string, double>* extra) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported format version");

    PolicySet p;
    p.vocab_ = Vocabulary::from_alphabet(j.at("alphabet").get<std::string>());
    const json& fc = j.at("feature_config");
    p.fc_ = FeatureConfig{fc.at("window").get<int>(), fc.at("layer_slots").get<int>(),
                          fc.at("position_slots").get<int>()};
    p.rank_ = j.at("rank").get<int>();
    p.init_seed_ = j.at("init_seed").get<uint64_t>();
    p.topo_ = parse_topology(j.at("topology").get<std::string>());
    p.base_ = matrix_from_json(j.at("base"));

    for (const auto& [key, val] : j.at("deltas").items()) {
        auto addr = NodeAddress::parse(key);
        if (!addr) throw std::runtime_error("checkpoint: bad address key '" + key + "'");
        NodeDelta nd;
        nd.A = matrix_from_json(val.at("A"));
        nd.B = matrix_from_json(val.at("B"));
        p.deltas_[*addr] = std::move(nd);
    }

    if (extra) {
        extra->clear();
        if (j.contains("extra"))
            *extra = j.at("extra").get<std::map<std::string, double>>();
    }
    return p;
}

void PolicySet::save(const std::string& path, const std::map<std::string, double>& extra) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << to_json(extra);
}

PolicySet PolicySet::load(const std::string& path, std::map<std::string, double>* extra) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), extra);
}

}  // namespace neuromas
