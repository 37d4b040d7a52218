#include "entrogame/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "entrogame/csvio.hpp"
#include "entrogame/errors.hpp"
#include "entrogame/numeric.hpp"
#include "entrogame/rng.hpp"

namespace entrogame {

namespace {

void check_probability(double p, const char* what) {
    if (std::isnan(p) || p < 0.0 || p > 1.0)
        throw ConfigError(std::string(what) + " must lie in [0,1]");
}

std::string context_bits(std::uint64_t c, int k) {
    std::string s;
    for (int i = k - 1; i >= 0; --i) s += ((c >> i) & 1) ? '1' : '0';
    return s.empty() ? "-" : s;
}

// Markov states print as bit contexts, hidden states by index.
std::string state_name(std::size_t i, SourceModel::Kind kind, int k) {
    if (kind == SourceModel::Kind::kMarkov) return "context " + context_bits(i, k);
    return "state " + std::to_string(i);
}

// Adjacency of the context/state chain restricted to positive-probability
// transitions.
struct ChainGraph {
    std::size_t states = 0;
    std::vector<std::vector<int>> out, in;
};

ChainGraph markov_graph(int k, const std::vector<double>& table) {
    const std::size_t s = std::size_t{1} << k;
    const std::uint64_t mask = s - 1;
    ChainGraph g{s, std::vector<std::vector<int>>(s), std::vector<std::vector<int>>(s)};
    for (std::size_t c = 0; c < s; ++c) {
        for (int b = 0; b < 2; ++b) {
            const double p = b ? table[c] : 1.0 - table[c];
            if (p <= 0.0) continue;
            const int to = static_cast<int>(((c << 1) | static_cast<unsigned>(b)) & mask);
            g.out[c].push_back(to);
            g.in[to].push_back(static_cast<int>(c));
        }
    }
    return g;
}

ChainGraph hmm_graph(const std::vector<std::vector<double>>& trans) {
    const std::size_t s = trans.size();
    ChainGraph g{s, std::vector<std::vector<int>>(s), std::vector<std::vector<int>>(s)};
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
            if (trans[i][j] > 0.0) {
                g.out[i].push_back(static_cast<int>(j));
                g.in[j].push_back(static_cast<int>(i));
            }
    return g;
}

std::vector<char> reachable(const std::vector<std::vector<int>>& adj, int start) {
    std::vector<char> seen(adj.size(), 0);
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
    }
    return seen;
}

// Period of a strongly connected digraph: gcd of (level[u] + 1 - level[v])
// over all edges, with BFS levels from any state.
bool is_aperiodic(const ChainGraph& g) {
    std::vector<long long> level(g.states, -1);
    std::queue<int> q;
    q.push(0);
    level[0] = 0;
    long long gcd = 0;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : g.out[u]) {
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
            gcd = std::gcd(gcd, std::llabs(level[u] + 1 - level[v]));
        }
    }
    return gcd == 1;
}

// Stationary law of a chain given either its dense transition matrix or a
// sparse "distribute pi" step. Dense Gaussian elimination below this size:
constexpr std::size_t kDenseSolveLimit = 512;

std::vector<double> solve_stationary_dense(std::vector<std::vector<double>> m) {
    // (M^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    const std::size_t n = m.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
    a[n - 1][n] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        if (a[col][col] == 0.0) throw std::runtime_error("singular stationary system");
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t cc = col; cc <= n; ++cc) a[r][cc] -= f * a[col][cc];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
    return pi;
}

template <typename Step>
std::vector<double> solve_stationary_power(std::size_t n, Step step) {
    std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
    for (int it = 0; it < 2000000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        step(pi, next);
        // Lazy chain keeps periodic components converging.
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = 0.5 * pi[i] + 0.5 * next[i];
            delta += std::fabs(next[i] - pi[i]);
        }
        pi.swap(next);
        if (delta < 1e-15) break;
    }
    return pi;
}

void normalize_in_place(std::vector<double>& pi) {
    double sum = 0.0;
    for (double& x : pi) {
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    for (double& x : pi) x /= sum;
}

}  // namespace

SourceModel SourceModel::bernoulli(double p1) {
    check_probability(p1, "bernoulli p1");
    SourceModel s;
    s.kind_ = Kind::kBernoulli;
    s.p1_ = p1;
    s.id_ = "bernoulli(p1=" + fmt_double(p1) + ")";
    s.stationary_ = {1.0 - p1, p1};
    s.has_stationary_ = true;
    return s;
}

SourceModel SourceModel::markov(int k, std::vector<double> p1_given_context) {
    if (k < 0 || k > 20) throw ConfigError("markov order must be in [0,20]");
    const std::size_t contexts = std::size_t{1} << k;
    if (p1_given_context.size() != contexts)
        throw ConfigError("markov table must have 2^k entries");
    for (double p : p1_given_context) check_probability(p, "markov transition");

    SourceModel s;
    s.kind_ = Kind::kMarkov;
    s.k_ = k;
    s.table_ = std::move(p1_given_context);
    s.id_ = "markov(k=" + std::to_string(k) + ")";
    s.solve_stationary();
    return s;
}

SourceModel SourceModel::hmm(std::vector<std::vector<double>> transition,
                             std::vector<double> emit1) {
    const std::size_t m = transition.size();
    if (m == 0) throw ConfigError("hmm needs at least one state");
    if (emit1.size() != m) throw ConfigError("hmm emit1 size must match state count");
    for (const auto& row : transition) {
        if (row.size() != m) throw ConfigError("hmm transition matrix must be square");
        double sum = 0.0;
        for (double p : row) {
            check_probability(p, "hmm transition");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw ConfigError("hmm transition rows must sum to 1 (within 1e-12)");
    }
    for (double p : emit1) check_probability(p, "hmm emission");

    SourceModel s;
    s.kind_ = Kind::kHmm;
    s.trans_ = std::move(transition);
    s.emit1_ = std::move(emit1);
    s.id_ = "hmm(m=" + std::to_string(m) + ")";
    s.solve_stationary();
    return s;
}

void SourceModel::solve_stationary() {
    const ChainGraph g =
        kind_ == Kind::kMarkov ? markov_graph(k_, table_) : hmm_graph(trans_);

    // Reducible chains construct fine (ergodicity queries still work) but
    // carry no stationary law.
    const std::vector<char> fwd = reachable(g.out, 0);
    const std::vector<char> bwd = reachable(g.in, 0);
    for (std::size_t i = 0; i < g.states; ++i)
        if (!fwd[i] || !bwd[i]) return;

    std::vector<double> pi;
    if (g.states <= kDenseSolveLimit) {
        std::vector<std::vector<double>> m;
        if (kind_ == Kind::kHmm) {
            m = trans_;
        } else {
            const std::size_t n = g.states;
            const std::uint64_t mask = n - 1;
            m.assign(n, std::vector<double>(n, 0.0));
            for (std::size_t c = 0; c < n; ++c) {
                m[c][((c << 1) | 1u) & mask] += table_[c];
                m[c][(c << 1) & mask] += 1.0 - table_[c];
            }
        }
        pi = solve_stationary_dense(std::move(m));
    } else if (kind_ == Kind::kMarkov) {
        const std::size_t n = g.states;
        const std::uint64_t mask = n - 1;
        pi = solve_stationary_power(n, [&](const std::vector<double>& from,
                                           std::vector<double>& to) {
            for (std::size_t c = 0; c < n; ++c) {
                const double p = table_[c];
                if (p > 0.0) to[((c << 1) | 1u) & mask] += from[c] * p;
                if (p < 1.0) to[(c << 1) & mask] += from[c] * (1.0 - p);
            }
        });
    } else {
        pi = solve_stationary_power(g.states, [&](const std::vector<double>& from,
                                                  std::vector<double>& to) {
            for (std::size_t i = 0; i < g.states; ++i)
                for (std::size_t j = 0; j < g.states; ++j)
                    if (trans_[i][j] > 0.0) to[j] += from[i] * trans_[i][j];
        });
    }

    normalize_in_place(pi);
    stationary_ = std::move(pi);
    has_stationary_ = true;
}

int SourceModel::state_count() const {
    switch (kind_) {
        case Kind::kBernoulli: return 2;
        case Kind::kMarkov: return 1 << k_;
        case Kind::kHmm: return static_cast<int>(trans_.size());
    }
    return 0;
}

double SourceModel::emission_p1(std::size_t state) const {
    if (kind_ != Kind::kHmm) throw ConfigError("emission_p1: not a hidden Markov source");
    return emit1_.at(state);
}

std::span<const double> SourceModel::transition_row(std::size_t state) const {
    if (kind_ != Kind::kHmm) throw ConfigError("transition_row: not a hidden Markov source");
    return trans_.at(state);
}

std::vector<double> SourceModel::stationary_distribution() const {
    if (!has_stationary_) {
        // Name a concrete unreachable class to ease debugging the chain.
        const ChainGraph g =
            kind_ == Kind::kMarkov ? markov_graph(k_, table_) : hmm_graph(trans_);
        const std::vector<char> fwd = reachable(g.out, 0);
        const std::vector<char> bwd = reachable(g.in, 0);
        std::string detail;
        for (std::size_t i = 0; i < g.states; ++i) {
            if (!fwd[i]) {
                detail = state_name(i, kind_, k_) + " is unreachable from " +
                         state_name(0, kind_, k_);
                break;
            }
            if (!bwd[i]) {
                detail = state_name(0, kind_, k_) + " is unreachable from " +
                         state_name(i, kind_, k_);
                break;
            }
        }
        throw PreconditionError(id_ + ": chain is reducible (" + detail + ")");
    }
    return stationary_;
}

ErgodicityReport SourceModel::ergodicity() const {
    ErgodicityReport rep;
    if (kind_ == Kind::kBernoulli) {
        // i.i.d. processes are ergodic.
        rep.irreducible = rep.aperiodic = rep.is_ergodic = true;
        return rep;
    }
    const ChainGraph g =
        kind_ == Kind::kMarkov ? markov_graph(k_, table_) : hmm_graph(trans_);
    const std::vector<char> fwd = reachable(g.out, 0);
    const std::vector<char> bwd = reachable(g.in, 0);
    rep.irreducible = true;
    for (std::size_t i = 0; i < g.states && rep.irreducible; ++i) {
        if (fwd[i] && bwd[i]) continue;
        rep.irreducible = false;
        rep.detail = !fwd[i] ? state_name(i, kind_, k_) + " unreachable from " +
                                   state_name(0, kind_, k_)
                             : state_name(0, kind_, k_) + " unreachable from " +
                                   state_name(i, kind_, k_);
    }
    rep.aperiodic = rep.irreducible && is_aperiodic(g);
    rep.is_ergodic = rep.irreducible && rep.aperiodic;
    return rep;
}

// ---------------------------------------------------------------------------
// Filter

SourceModel::Filter::Filter(const SourceModel& source) : src_(&source) { reset(); }

void SourceModel::Filter::reset() {
    seen_ = 0;
    ctx_ = 0;
    switch (src_->kind_) {
        case Kind::kBernoulli:
            dist_.clear();
            break;
        case Kind::kMarkov:
            dist_ = src_->k_ > 0 ? src_->stationary_distribution() : std::vector<double>{};
            break;
        case Kind::kHmm:
            dist_ = src_->stationary_distribution();
            break;
    }
}

double SourceModel::Filter::prob_next_one() const {
    switch (src_->kind_) {
        case Kind::kBernoulli:
            return src_->p1_;
        case Kind::kMarkov: {
            if (seen_ >= static_cast<std::size_t>(src_->k_)) return src_->table_[ctx_];
            double p = 0.0;
            for (std::size_t c = 0; c < dist_.size(); ++c)
                p += dist_[c] * src_->table_[c];
            return p;
        }
        case Kind::kHmm: {
            double p = 0.0;
            for (std::size_t s = 0; s < dist_.size(); ++s)
                p += dist_[s] * src_->emit1_[s];
            return p;
        }
    }
    return 0.0;
}

bool SourceModel::Filter::observe(int bit) {
    switch (src_->kind_) {
        case Kind::kBernoulli: {
            const double pb = bit ? src_->p1_ : 1.0 - src_->p1_;
            if (pb == 0.0) {
                reset();
                return false;
            }
            ++seen_;
            return true;
        }
        case Kind::kMarkov: {
            const std::uint64_t mask = (std::uint64_t{1} << src_->k_) - 1;
            if (seen_ >= static_cast<std::size_t>(src_->k_)) {
                const double p = src_->table_[ctx_];
                const double pb = bit ? p : 1.0 - p;
                if (pb == 0.0) {
                    reset();
                    return false;
                }
                ctx_ = ((ctx_ << 1) | static_cast<unsigned>(bit)) & mask;
                ++seen_;
                return true;
            }
            std::vector<double> next(dist_.size(), 0.0);
            double norm = 0.0;
            for (std::size_t c = 0; c < dist_.size(); ++c) {
                if (dist_[c] == 0.0) continue;
                const double p = src_->table_[c];
                const double pb = bit ? p : 1.0 - p;
                if (pb == 0.0) continue;
                const std::uint64_t to = ((c << 1) | static_cast<unsigned>(bit)) & mask;
                next[to] += dist_[c] * pb;
                norm += dist_[c] * pb;
            }
            if (norm == 0.0) {
                reset();
                return false;
            }
            for (double& x : next) x /= norm;
            dist_ = std::move(next);
            ctx_ = ((ctx_ << 1) | static_cast<unsigned>(bit)) & mask;
            ++seen_;
            return true;
        }
        case Kind::kHmm: {
            const std::size_t m = dist_.size();
            std::vector<double> post(m, 0.0);
            double norm = 0.0;
            for (std::size_t s = 0; s < m; ++s) {
                const double e = bit ? src_->emit1_[s] : 1.0 - src_->emit1_[s];
                post[s] = dist_[s] * e;
                norm += post[s];
            }
            if (norm == 0.0) {
                reset();
                return false;
            }
            for (double& x : post) x /= norm;
            std::vector<double> next(m, 0.0);
            for (std::size_t s = 0; s < m; ++s) {
                if (post[s] == 0.0) continue;
                for (std::size_t t = 0; t < m; ++t) next[t] += post[s] * src_->trans_[s][t];
            }
            dist_ = std::move(next);
            ++seen_;
            return true;
        }
    }
    return false;
}

void SourceModel::Filter::observe_strict(int bit) {
    if (!observe(bit))
        throw PreconditionError(src_->id_ + ": conditioning on a zero-probability history");
}

// ---------------------------------------------------------------------------

double SourceModel::string_probability(std::span<const std::uint8_t> bits) const {
    Filter f(*this);
    double prob = 1.0;
    for (std::uint8_t b : bits) {
        const double p1 = f.prob_next_one();
        const double pb = b ? p1 : 1.0 - p1;
        if (pb == 0.0) return 0.0;
        prob *= pb;
        f.observe(b);
    }
    return prob;
}

double SourceModel::conditional_next_probability(
    std::span<const std::uint8_t> history) const {
    Filter f(*this);
    for (std::uint8_t b : history) f.observe_strict(b);
    return f.prob_next_one();
}

PathSample SourceModel::sample_path(std::size_t n, std::uint64_t seed) const {
    if (n < 1) throw ConfigError("sample_path: n must be >= 1");
    const ErgodicityReport erg = ergodicity();
    if (!erg.is_ergodic)
        throw PreconditionError(id_ + ": refusing to sample a non-ergodic source (" +
                                erg.detail + ")");

    PathSample out;
    out.seed = seed;
    out.source_id = id_;
    out.bits.reserve(n);
    SplitMix64 rng(seed);

    if (kind_ == Kind::kHmm) {
        std::size_t state = draw_categorical(stationary_distribution(), rng.uniform01());
        for (std::size_t i = 0; i < n; ++i) {
            const int bit = rng.uniform01() < emit1_[state] ? 1 : 0;
            out.bits.push_back(static_cast<std::uint8_t>(bit));
            state = draw_categorical(trans_[state], rng.uniform01());
        }
        return out;
    }

    Filter f(*this);
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = f.prob_next_one();
        const int bit = rng.uniform01() < p1 ? 1 : 0;
        out.bits.push_back(static_cast<std::uint8_t>(bit));
        f.observe(bit);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

SourceModel SourceModel::from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "bernoulli") {
        if (!j.contains("p1")) throw ConfigError("bernoulli descriptor requires p1");
        return bernoulli(j.at("p1").get<double>());
    }
    if (kind == "markov") {
        if (!j.contains("k") || !j.contains("p1_given"))
            throw ConfigError("markov descriptor requires k and p1_given");
        const int k = j.at("k").get<int>();
        if (k < 0 || k > 20) throw ConfigError("markov order must be in [0,20]");
        const std::size_t contexts = std::size_t{1} << k;
        std::vector<double> table(contexts, -1.0);
        for (const auto& [key, val] : j.at("p1_given").items()) {
            if (key.size() != static_cast<std::size_t>(k))
                throw ConfigError("markov p1_given key '" + key + "' must have length k");
            std::uint64_t c = 0;
            for (char ch : key) {
                if (ch != '0' && ch != '1')
                    throw ConfigError("markov p1_given key '" + key + "' must be binary");
                c = (c << 1) | static_cast<unsigned>(ch == '1');
            }
            table[c] = val.get<double>();
        }
        for (std::size_t c = 0; c < contexts; ++c)
            if (table[c] < 0.0)
                throw ConfigError("markov p1_given missing context '" +
                                  context_bits(c, k) + "'");
        return markov(k, std::move(table));
    }
    if (kind == "hmm") {
        if (!j.contains("A") || !j.contains("emit1"))
            throw ConfigError("hmm descriptor requires A and emit1");
        return hmm(j.at("A").get<std::vector<std::vector<double>>>(),
                   j.at("emit1").get<std::vector<double>>());
    }
    throw ConfigError("source descriptor: unknown kind '" + kind + "'");
}

nlohmann::json SourceModel::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::kBernoulli:
            j["kind"] = "bernoulli";
            j["p1"] = p1_;
            break;
        case Kind::kMarkov: {
            j["kind"] = "markov";
            j["k"] = k_;
            nlohmann::json table = nlohmann::json::object();
            for (std::size_t c = 0; c < table_.size(); ++c)
                table[context_bits(c, k_)] = table_[c];
            j["p1_given"] = std::move(table);
            break;
        }
        case Kind::kHmm:
            j["kind"] = "hmm";
            j["A"] = trans_;
            j["emit1"] = emit1_;
            break;
    }
    return j;
}

}  // namespace entrogame
