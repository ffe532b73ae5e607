#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mfrom {

// Portable random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation defined, so the
// conversions below are written out explicitly: uniform() takes the top 53
// bits of one engine draw, below(n) uses rejection on the top bits. Any
// platform therefore produces the same values for the same seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates shuffle of [0, n).
  std::vector<int> permutation(int n);

  // k distinct values from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

private:
  std::mt19937_64 engine_;
};

} // namespace mfrom
