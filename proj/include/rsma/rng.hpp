#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>

namespace rsma {

// Independent random streams of one trial. Adding a purpose never shifts the
// draws of the existing ones.
enum class Stream : std::uint32_t {
  kChannel = 1,
  kCovariance = 2,
  kCsitError = 3,
  kSolver = 4,
  kSymbols = 5,
  kTest = 99,
};

// mt19937_64 with portable transforms: std:: distributions are not
// bit-reproducible across standard libraries, so uniform/normal are derived
// here directly from the raw 64-bit output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng for_stream(std::uint64_t seed, Stream purpose, std::uint64_t index = 0);

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive bounds
  double normal();
  std::complex<double> complex_normal();  // CN(0, 1)

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace rsma
