// Copyright 2026 The hoadoa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HOADOA_RNG_HPP_
#define HOADOA_RNG_HPP_

#include <cstdint>

namespace hoadoa {

// SplitMix64 finalizer. Used both as a seed expander and as the stream
// splitter: derived streams are decorrelated regardless of how master/index
// values cluster.
uint64_t mix64(uint64_t x);

// Derives an independent child seed from a master seed and a stream index.
// mix_seed(m, i) == mix_seed(m, j) only if i == j, so parallel workers can
// seed per-item generators without coordination.
uint64_t mix_seed(uint64_t master, uint64_t stream);

// xoshiro256++ with explicit floating-point derivation. All distributions
// are implemented in this class rather than <random> so that generated
// datasets are byte-reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n); n must be > 0.
  uint64_t uniform_int(uint64_t n);
  // Standard normal via Box-Muller (caches the second variate).
  double normal();
  // Uniformly distributed unit vector components (x, y, z).
  void unit_vector(double* x, double* y, double* z);

 private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hoadoa

#endif  // HOADOA_RNG_HPP_
