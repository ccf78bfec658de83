#include "resil/rng.hpp"

#include <limits>

#include "resil/errors.hpp"

namespace resil {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) throw InputError("RandomStream::below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r < limit) return r % bound;
  }
}

BernoulliWords::BernoulliWords(const Rational& probability) {
  if (probability < 0 || probability > 1) throw InputError("probability outside [0,1]");
  if (!probability.get_num().fits_ulong_p() || !probability.get_den().fits_ulong_p()) {
    throw InputError("probability numerator/denominator must fit in 64 bits");
  }
  numerator_ = probability.get_num().get_ui();
  denominator_ = probability.get_den().get_ui();
  if ((denominator_ & (denominator_ - 1)) == 0) {
    int bits = 0;
    while ((std::uint64_t{1} << bits) < denominator_) ++bits;
    dyadic_bits_ = bits;
  }
}

std::uint64_t BernoulliWords::draw(RandomStream& rng) const {
  if (numerator_ == 0) return 0;
  if (numerator_ == denominator_) return ~std::uint64_t{0};
  if (dyadic_bits_ >= 0) {
    // Lane value r (dyadic_bits_ random bits, MSB first) satisfies r < numerator_.
    std::uint64_t less = 0;
    std::uint64_t equal = ~std::uint64_t{0};
    for (int b = dyadic_bits_ - 1; b >= 0; --b) {
      const std::uint64_t r = rng.word();
      if ((numerator_ >> b) & 1U) {
        less |= equal & ~r;
        equal &= r;
      } else {
        equal &= ~r;
      }
    }
    return less;
  }
  std::uint64_t out = 0;
  for (int lane = 0; lane < 64; ++lane) {
    if (rng.below(denominator_) < numerator_) out |= std::uint64_t{1} << lane;
  }
  return out;
}

}  // namespace resil
