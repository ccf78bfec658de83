#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resil/numeric.hpp"

namespace resil::galois {

// Deterministic trial division; v < 2 is not prime.
bool is_prime(std::uint64_t v);

// Arithmetic in Z_v for prime v < 2^32.
class PrimeField {
 public:
  explicit PrimeField(std::uint32_t modulus);

  std::uint32_t modulus() const noexcept { return modulus_; }

  std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept {
    const std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<std::uint32_t>(s >= modulus_ ? s - modulus_ : s);
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const noexcept {
    return a >= b ? a - b : static_cast<std::uint32_t>(std::uint64_t{a} + modulus_ - b);
  }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept {
    return static_cast<std::uint32_t>(std::uint64_t{a} * b % modulus_);
  }
  std::uint32_t pow(std::uint32_t base, std::uint64_t exponent) const noexcept;
  // Multiplicative inverse with the convention inv(0) = 0 (i.e. x^(v-2)).
  std::uint32_t inv(std::uint32_t a) const noexcept { return pow(a, modulus_ - 2); }

 private:
  std::uint32_t modulus_;
};

// kWithConstant: codeword_k = m_0 + m_1 e_k + ... + m_{l-1} e_k^{l-1}.
// kNoConstant:   codeword_k = m_0 e_k + ... + m_{l-1} e_k^l, over nonzero points.
// The second layout is closed under adding a constant only by changing the
// polynomial, which is what shifted block sets need.
enum class RsLayout { kWithConstant, kNoConstant };

class RSCode {
 public:
  // Default evaluation points: 0..w2-1 (kWithConstant) or 1..w2 (kNoConstant).
  RSCode(PrimeField field, unsigned ell, unsigned w2, RsLayout layout = RsLayout::kWithConstant);
  RSCode(PrimeField field, unsigned ell, std::vector<std::uint32_t> eval_points,
         RsLayout layout = RsLayout::kWithConstant);

  const PrimeField& field() const noexcept { return field_; }
  unsigned ell() const noexcept { return ell_; }
  unsigned length() const noexcept { return static_cast<unsigned>(eval_points_.size()); }
  RsLayout layout() const noexcept { return layout_; }
  const std::vector<std::uint32_t>& eval_points() const noexcept { return eval_points_; }

  // v^ell; throws ResourceError when it does not fit an Index.
  Index num_messages() const;

  std::vector<std::uint32_t> encode(std::span<const std::uint32_t> message) const;
  void encode_into(std::span<const std::uint32_t> message, std::span<std::uint32_t> out) const;

  // Base-v digits, least significant first.
  std::vector<std::uint32_t> index_to_message(Index i) const;
  Index message_to_index(std::span<const std::uint32_t> message) const;

 private:
  void validate() const;

  PrimeField field_;
  unsigned ell_;
  std::vector<std::uint32_t> eval_points_;
  RsLayout layout_;
};

// Free-function forms matching the module's operation names.
inline std::vector<std::uint32_t> rs_encode(const RSCode& code, std::span<const std::uint32_t> message) {
  return code.encode(message);
}
inline std::vector<std::uint32_t> index_to_message(const RSCode& code, Index i) {
  return code.index_to_message(i);
}

}  // namespace resil::galois
