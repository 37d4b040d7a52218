#ifndef ENTROGAME_RNG_HPP
#define ENTROGAME_RNG_HPP

#include <cstdint>
#include <span>

namespace entrogame {

// SplitMix64 (Steele, Lea, Vigna; public domain). Chosen over <random>
// engines because the uniform mapping below is bit-reproducible across
// platforms and standard libraries.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0,1), 53 significant bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

// Per-path seeds are derived additively so experiment configs stay legible.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return base + index;
}

// Inverse-CDF draw from a probability vector given u in [0,1).
inline std::size_t draw_categorical(std::span<const double> probs, double u) {
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) last_positive = i;
        cum += probs[i];
        if (u < cum) return i;
    }
    return last_positive;  // rounding guard at u ~ 1
}

}  // namespace entrogame

#endif
