#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <thread>
#include <type_traits>
#include <vector>

namespace ipslab {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream key. A stream is a pure function of the master seed
/// and the path of ids used to reach it, so scheduling order never matters.
class Stream {
 public:
  constexpr explicit Stream(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x5eedULL)) {}

  [[nodiscard]] constexpr Stream child(std::uint64_t id) const noexcept {
    Stream s(0);
    s.key_ = mix64(key_ ^ mix64(id + 0x632be59bd9b4e019ULL));
    return s;
  }

  [[nodiscard]] Engine engine() const {
    std::seed_seq seq{static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32),
                      static_cast<std::uint32_t>(mix64(key_)),
                      static_cast<std::uint32_t>(mix64(key_) >> 32)};
    return Engine(seq);
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

// Fixed ids for the independent channels of a single experiment.
namespace channel {
inline constexpr std::uint64_t kReplica = 1;
inline constexpr std::uint64_t kDual = 2;
inline constexpr std::uint64_t kClock = 3;
inline constexpr std::uint64_t kInitial = 4;
inline constexpr std::uint64_t kAux = 5;
}  // namespace channel

/// Runs fn(i) for i in [0, n) on a small thread pool and returns the results
/// in index order. Each call must derive its randomness from i alone.
template <class Fn>
auto map_replicas(std::size_t n, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<R> out(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n / 8));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

inline double sample_beta(Engine& eng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(eng);
  const double y = gb(eng);
  return x / (x + y);
}

}  // namespace ipslab
