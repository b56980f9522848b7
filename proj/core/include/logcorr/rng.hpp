#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace logcorr {

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter block(Counter counter, Key key) noexcept;
};

/// Counter-based random stream.
///
/// A stream is addressed by (seed, replica, substream). The seed is the
/// Philox key; the counter holds a running block index, the substream id and
/// the 64-bit replica index. Two streams with different addresses never share
/// a counter, so every replica/step can be regenerated in isolation and the
/// draws do not depend on which worker ran them or in which order.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t replica, std::uint32_t substream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Standard normal via Box-Muller; draws come in cached pairs.
  double normal() noexcept;

  void fill_normal(std::span<double> out) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t replica() const noexcept { return replica_; }
  std::uint32_t substream() const noexcept { return substream_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t replica_;
  std::uint32_t substream_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace logcorr
