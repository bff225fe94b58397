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

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace tmcmc {

/// Name of the generator recorded in every experiment's metadata.
inline constexpr const char* kRngAlgorithm = "philox4x32-10/box-muller";

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Running totals of entropy consumed by a stream.
///
/// `continuous` counts scalar draws (one per uniform, per normal, per
/// half-normal); `sign_bits` counts single random bits.
struct DrawCounters {
  std::uint64_t continuous = 0;
  std::uint64_t sign_bits = 0;

  DrawCounters& operator+=(const DrawCounters& other) {
    continuous += other.continuous;
    sign_bits += other.sign_bits;
    return *this;
  }
  friend DrawCounters operator-(DrawCounters a, const DrawCounters& b) {
    a.continuous -= b.continuous;
    a.sign_bits -= b.sign_bits;
    return a;
  }
  friend bool operator==(const DrawCounters&, const DrawCounters&) = default;
};

/// A reproducible random stream keyed by (seed, stream_id).
///
/// The seed is the Philox key and the stream id occupies the upper half of
/// the 128-bit counter, so distinct stream ids never share a counter block.
/// A stream has a single owner; nothing here is synchronized.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  const DrawCounters& counters() const { return counters_; }

  /// Raw 64-bit output. Not counted as a draw.
  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  /// log of `uniform()`, used by the accept test.
  double log_uniform();
  /// Standard normal via Box-Muller; the second variate of each pair is kept.
  double standard_normal();

  /// |N(0, sigma^2)|, i.e. N(0, sigma^2) truncated to (0, inf).
  double draw_half_normal(double sigma);
  /// d independent +/-1 values, one random bit each.
  Eigen::VectorXd draw_signs(Eigen::Index d);
  /// d iid N(0, sigma^2) values.
  Eigen::VectorXd draw_std_normal_vec(Eigen::Index d, double sigma);

 private:
  std::uint64_t raw_u64();
  bool next_bit();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;

  std::uint64_t bit_word_ = 0;
  int bits_left_ = 0;

  double spare_normal_ = 0.0;
  bool has_spare_ = false;

  DrawCounters counters_;
};

/// Stream id for chain `index` of an ensemble tagged `tag`
/// (e.g. one tag per kernel in a paired experiment).
constexpr std::uint64_t derive_stream_id(std::uint32_t tag, std::uint64_t index) {
  return (static_cast<std::uint64_t>(tag) << 40) ^ index;
}

}  // namespace tmcmc
