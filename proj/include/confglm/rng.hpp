#pragma once

#include <cstdint>
#include <random>

namespace confglm {

// splitmix64 finalizer; used to turn (master seed, replication, stream)
// triples into well-separated engine seeds so replications are order-free.
std::uint64_t mix64(std::uint64_t z);
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t rep,
                       std::uint64_t stream = 0);

// Deterministic sampler with fixed algorithms (53-bit uniforms, polar
// normals, Marsaglia-Tsang gammas) so streams do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform();                        // [0, 1)
  double normal();                         // standard normal
  double gamma(double shape);              // rate 1
  double gamma(double shape, double rate);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace confglm
