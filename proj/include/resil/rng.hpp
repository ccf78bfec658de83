#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "resil/numeric.hpp"

namespace resil {

// Seeds for independent substreams derived from one master seed. Every parallel
// task draws from substream(master, task_id), so results never depend on how
// tasks are scheduled onto workers.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::uint64_t stream) : engine_(substream_seed(master, stream)) {}

  std::uint64_t word() { return engine_(); }

  // Uniform on [0, bound) by rejection; portable across standard libraries.
  std::uint64_t below(std::uint64_t bound);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Draws 64 independent Bernoulli(p/q) lanes per call. Dyadic q uses a bit-sliced
// comparison of log2(q) random words against p, so each lane is exact; other
// denominators fall back to per-lane integer draws.
class BernoulliWords {
 public:
  explicit BernoulliWords(const Rational& probability);

  std::uint64_t draw(RandomStream& rng) const;

 private:
  std::uint64_t numerator_ = 0;
  std::uint64_t denominator_ = 1;
  int dyadic_bits_ = -1;
};

}  // namespace resil
