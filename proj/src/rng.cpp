/*
   Copyright 2026 The tmcmc Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "tmcmc/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tmcmc/errors.hpp"

namespace tmcmc {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Maps 64 random bits to the open interval (0, 1).
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

void require_positive(double sigma, const char* what) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter(std::string(what) + ": sigma must be positive and finite, got " +
                           std::to_string(sigma));
  }
}

void require_dimension(Eigen::Index d, const char* what) {
  if (d < 1) {
    throw InvalidParameter(std::string(what) + ": d must be >= 1, got " + std::to_string(d));
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

std::uint64_t RngStream::raw_u64() {
  if (buffered_words_ == 0) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_id_),
                          static_cast<std::uint32_t>(stream_id_ >> 32)},
                         {static_cast<std::uint32_t>(seed_),
                          static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    buffered_words_ = 2;
  }
  const int base = (2 - buffered_words_) * 2;
  --buffered_words_;
  return (static_cast<std::uint64_t>(buffer_[base + 1]) << 32) | buffer_[base];
}

std::uint64_t RngStream::next_u64() { return raw_u64(); }

bool RngStream::next_bit() {
  if (bits_left_ == 0) {
    bit_word_ = raw_u64();
    bits_left_ = 64;
  }
  const bool bit = (bit_word_ & 1u) != 0;
  bit_word_ >>= 1;
  --bits_left_;
  return bit;
}

double RngStream::uniform() {
  ++counters_.continuous;
  return to_open_unit(raw_u64());
}

double RngStream::log_uniform() { return std::log(uniform()); }

double RngStream::standard_normal() {
  ++counters_.continuous;
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = to_open_unit(raw_u64());
  const double u2 = to_open_unit(raw_u64());
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double RngStream::draw_half_normal(double sigma) {
  require_positive(sigma, "draw_half_normal");
  double z = 0.0;
  // A zero draw has probability ~2^-53 per variate; resample to keep eps > 0.
  do {
    z = std::abs(standard_normal());
  } while (z == 0.0);
  return sigma * z;
}

Eigen::VectorXd RngStream::draw_signs(Eigen::Index d) {
  require_dimension(d, "draw_signs");
  Eigen::VectorXd signs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    signs[i] = next_bit() ? 1.0 : -1.0;
  }
  counters_.sign_bits += static_cast<std::uint64_t>(d);
  return signs;
}

Eigen::VectorXd RngStream::draw_std_normal_vec(Eigen::Index d, double sigma) {
  require_dimension(d, "draw_std_normal_vec");
  require_positive(sigma, "draw_std_normal_vec");
  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out[i] = sigma * standard_normal();
  }
  return out;
}

}  // namespace tmcmc
