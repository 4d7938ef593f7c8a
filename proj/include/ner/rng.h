#pragma once

#include <cstdint>
#include <random>

namespace ner {

// Seeded PRNG shared by initialization, shuffling and corpus synthesis.
// All runs are reproducible from the single seed in the config.
class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    // Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(engine_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace ner
