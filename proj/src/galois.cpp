#include "resil/galois.hpp"

#include <algorithm>
#include <string>

#include "resil/errors.hpp"

namespace resil::galois {

bool is_prime(std::uint64_t v) {
  if (v < 2) return false;
  if (v < 4) return true;
  if (v % 2 == 0) return false;
  for (std::uint64_t d = 3; d <= v / d; d += 2) {
    if (v % d == 0) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint32_t modulus) : modulus_(modulus) {
  if (!is_prime(modulus)) throw InputError("field modulus " + std::to_string(modulus) + " is not prime");
}

std::uint32_t PrimeField::pow(std::uint32_t base, std::uint64_t exponent) const noexcept {
  std::uint64_t result = 1 % modulus_;
  std::uint64_t b = base % modulus_;
  while (exponent > 0) {
    if (exponent & 1U) result = result * b % modulus_;
    b = b * b % modulus_;
    exponent >>= 1;
  }
  return static_cast<std::uint32_t>(result);
}

namespace {

std::vector<std::uint32_t> default_points(unsigned w2, RsLayout layout) {
  std::vector<std::uint32_t> pts(w2);
  const std::uint32_t first = layout == RsLayout::kNoConstant ? 1 : 0;
  for (unsigned k = 0; k < w2; ++k) pts[k] = first + k;
  return pts;
}

}  // namespace

RSCode::RSCode(PrimeField field, unsigned ell, unsigned w2, RsLayout layout)
    : RSCode(field, ell, default_points(w2, layout), layout) {}

RSCode::RSCode(PrimeField field, unsigned ell, std::vector<std::uint32_t> eval_points, RsLayout layout)
    : field_(field), ell_(ell), eval_points_(std::move(eval_points)), layout_(layout) {
  validate();
}

void RSCode::validate() const {
  const std::uint32_t v = field_.modulus();
  const auto w2 = eval_points_.size();
  if (ell_ < 1) throw InputError("RS message length must be >= 1");
  if (w2 < ell_) throw InputError("RS codeword length must be >= message length");
  if (w2 > v) throw InputError("RS codeword length exceeds field size");
  std::vector<std::uint32_t> sorted = eval_points_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("RS evaluation points must be distinct");
  }
  if (!sorted.empty() && sorted.back() >= v) throw InputError("RS evaluation point outside the field");
  if (layout_ == RsLayout::kNoConstant && !sorted.empty() && sorted.front() == 0) {
    throw InputError("constant-free RS layout needs nonzero evaluation points");
  }
}

Index RSCode::num_messages() const {
  Index out = 0;
  if (!checked_pow(field_.modulus(), ell_, out)) throw ResourceError("RS message space exceeds 128 bits");
  return out;
}

std::vector<std::uint32_t> RSCode::encode(std::span<const std::uint32_t> message) const {
  std::vector<std::uint32_t> out(length());
  encode_into(message, out);
  return out;
}

void RSCode::encode_into(std::span<const std::uint32_t> message, std::span<std::uint32_t> out) const {
  if (message.size() != ell_) {
    throw InputError("RS message has length " + std::to_string(message.size()) + ", expected " +
                     std::to_string(ell_));
  }
  if (out.size() != length()) throw InputError("RS output buffer has wrong length");
  const std::uint32_t v = field_.modulus();
  for (auto m : message) {
    if (m >= v) throw InputError("RS message entry outside the field");
  }
  for (std::size_t k = 0; k < eval_points_.size(); ++k) {
    const std::uint32_t x = eval_points_[k];
    // Horner on the coefficient vector, highest degree first.
    std::uint32_t acc = 0;
    for (std::size_t t = ell_; t-- > 0;) acc = field_.add(field_.mul(acc, x), message[t]);
    if (layout_ == RsLayout::kNoConstant) acc = field_.mul(acc, x);
    out[k] = acc;
  }
}

std::vector<std::uint32_t> RSCode::index_to_message(Index i) const {
  if (i >= num_messages()) throw InputError("message index " + index_to_string(i) + " out of range");
  std::vector<std::uint32_t> msg(ell_);
  const std::uint32_t v = field_.modulus();
  for (unsigned t = 0; t < ell_; ++t) {
    msg[t] = static_cast<std::uint32_t>(i % v);
    i /= v;
  }
  return msg;
}

Index RSCode::message_to_index(std::span<const std::uint32_t> message) const {
  if (message.size() != ell_) throw InputError("RS message has wrong length");
  const std::uint32_t v = field_.modulus();
  Index out = 0;
  for (std::size_t t = ell_; t-- > 0;) {
    if (message[t] >= v) throw InputError("RS message entry outside the field");
    out = out * v + message[t];
  }
  return out;
}

}  // namespace resil::galois
