#pragma once

#include <cstdint>
#include <random>

namespace padnet {

// Purpose tag folded into every stream key so phases never share draws.
enum class StreamTag : std::uint32_t {
  Radius = 1,
  Permutation = 2,
  EdgeCoin = 3,
  RootCoin = 4,
  Generator = 5,
  Trial = 6,
  Demands = 7,
};

/**
   Reproducible random stream keyed by (seed, tag, iteration, node).

   Each node of each decomposition iteration owns its own stream, so the
   values a node draws do not depend on the order in which nodes execute.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamTag tag, std::uint64_t iteration, std::uint64_t node) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(iteration),
                      static_cast<std::uint32_t>(iteration >> 32),
                      static_cast<std::uint32_t>(node), static_cast<std::uint32_t>(node >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace padnet
