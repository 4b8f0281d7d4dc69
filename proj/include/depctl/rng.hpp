// Counter-based random streams (Philox4x32-10).
//
// A stream is identified by (seed, stream_id); the n-th draw of a stream is a
// pure function of (seed, stream_id, n), so replication r of a Monte Carlo run
// produces the same numbers no matter which worker executes it.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace depctl {

class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  // Unit-mean exponential.
  double exponential() noexcept;
  double normal() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace depctl
