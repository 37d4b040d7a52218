#ifndef ENTROGAME_SOURCES_HPP
#define ENTROGAME_SOURCES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace entrogame {

struct ErgodicityReport {
    bool irreducible = false;
    bool aperiodic = false;
    bool is_ergodic = false;
    std::string detail;  // names an unreachable class when reducible
};

struct PathSample {
    std::vector<std::uint8_t> bits;
    std::uint64_t seed = 0;
    std::string source_id;
};

// A stationary binary source with exact string and conditional
// probabilities. Three families: i.i.d. Bernoulli, order-k Markov chains
// over bit contexts, and hidden Markov models with Bernoulli emissions.
// The initial law is always the stationary law of the underlying chain;
// non-stationary initialization is not representable.
//
// Immutable after construction; all probability queries are pure.
class SourceModel {
  public:
    enum class Kind { kBernoulli, kMarkov, kHmm };

    static SourceModel bernoulli(double p1);
    // p1_given_context[c] = P(next = 1 | context c), where the context is
    // the last k bits read in order (most recent bit = lowest bit of c).
    static SourceModel markov(int k, std::vector<double> p1_given_context);
    static SourceModel hmm(std::vector<std::vector<double>> transition,
                           std::vector<double> emit1);

    // {"kind":"bernoulli","p1":..}, {"kind":"markov","k":..,"p1_given":{..}},
    // {"kind":"hmm","A":[[..]],"emit1":[..]}
    static SourceModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    Kind kind() const { return kind_; }
    int markov_order() const { return k_; }
    int state_count() const;  // contexts (2^k) or hidden states; 2 for Bernoulli
    const std::string& id() const { return id_; }

    // HMM-only accessors (hidden-chain simulation needs them).
    double emission_p1(std::size_t state) const;
    std::span<const double> transition_row(std::size_t state) const;

    // Stationary law of the context/state chain (next-bit law for
    // Bernoulli). Throws PreconditionError for reducible chains, naming an
    // unreachable class. Returned by value: models are often temporaries.
    std::vector<double> stationary_distribution() const;

    // Exact P(C_w) of the cylinder of w under the stationary process;
    // P(empty) = 1.
    double string_probability(std::span<const std::uint8_t> bits) const;

    // P(next = 1 | history) = P(history.1)/P(history). Throws
    // PreconditionError when the history has probability zero.
    double conditional_next_probability(std::span<const std::uint8_t> history) const;

    ErgodicityReport ergodicity() const;

    // Seeded deterministic sampling; refuses non-ergodic sources. Bernoulli
    // and Markov paths draw one uniform per bit from the sequential
    // conditional; HMM paths simulate the hidden chain (one uniform for the
    // initial state, then one per emission and one per transition).
    PathSample sample_path(std::size_t n, std::uint64_t seed) const;

    // Incremental conditional filter: prob_next_one() is
    // P(next = 1 | all bits observed so far), starting from the empty
    // history. observe() returns false if the observed bit had conditional
    // probability zero (the filter is then reset to the stationary law so
    // lenient callers stay total).
    class Filter {
      public:
        explicit Filter(const SourceModel& source);
        double prob_next_one() const;
        bool observe(int bit);
        void observe_strict(int bit);  // throws PreconditionError on a null event

      private:
        const SourceModel* src_;
        std::vector<double> dist_;   // context distribution / predictive state law
        std::uint64_t ctx_ = 0;      // Markov fast path once k bits are seen
        std::size_t seen_ = 0;
        void reset();
        friend class SourceModel;
    };
    Filter filter() const { return Filter(*this); }

  private:
    SourceModel() = default;
    void solve_stationary();  // called once by the factories

    Kind kind_ = Kind::kBernoulli;
    std::string id_;
    // Bernoulli / Markov
    double p1_ = 0.5;
    int k_ = 0;
    std::vector<double> table_;  // size 2^k, P(1 | context)
    // HMM
    std::vector<std::vector<double>> trans_;
    std::vector<double> emit1_;

    std::vector<double> stationary_;  // empty when the chain is reducible
    bool has_stationary_ = false;
};

}  // namespace entrogame

#endif
