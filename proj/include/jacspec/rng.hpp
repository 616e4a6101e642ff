#pragma once

#include <array>
#include <cstdint>

namespace jacspec {

/// Philox4x32-10 block function: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Random stream identified by (seed, stream id).
///
/// The key is the seed; the upper half of the counter is the stream id and
/// the lower half counts blocks, so streams are independent of the order in
/// which they are consumed.
class PhiloxStream {
public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  double rademacher();
  /// Uniform on (-sqrt 3, sqrt 3): mean 0, variance 1.
  double uniform_unit_variance();
  double cauchy(double scale);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jacspec
