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

#include "hoadoa/rng.hpp"

#include <cmath>
#include <cstdint>
#include <set>

#include "doctest.h"

using hoadoa::mix64;
using hoadoa::mix_seed;
using hoadoa::Rng;

TEST_CASE("identical seeds give identical streams, different seeds differ") {
  Rng a(42), b(42), c(43);
  bool same = true, differ = false;
  for (int i = 0; i < 256; ++i) {
    uint64_t x = a.next_u64();
    if (x != b.next_u64()) same = false;
    if (x != c.next_u64()) differ = true;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("mix_seed separates streams and is order-sensitive") {
  std::set<uint64_t> seen;
  for (uint64_t stream = 0; stream < 1000; ++stream)
    seen.insert(mix_seed(7, stream));
  CHECK(seen.size() == 1000);
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix64(0) != 0);  // zero input must not map to zero state
}

TEST_CASE("uniform stays in [0,1) and has plausible mean/variance") {
  Rng r(123);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 0.01);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.01);
}

TEST_CASE("uniform(lo,hi) respects bounds") {
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("uniform_int covers all residues without gross bias") {
  Rng r(5);
  int counts[7] = {0};
  const int n = 70000;
  for (int i = 0; i < n; ++i) counts[r.uniform_int(7)]++;
  for (int k = 0; k < 7; ++k) {
    CHECK(counts[k] > 9000);
    CHECK(counts[k] < 11000);
  }
}

TEST_CASE("normal has zero mean, unit variance, light third moment") {
  Rng r(77);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s3 / n) < 0.05);
}

TEST_CASE("unit_vector yields unit norm and balanced octants") {
  Rng r(31);
  int octant[8] = {0};
  const int n = 80000;
  for (int i = 0; i < n; ++i) {
    double x, y, z;
    r.unit_vector(&x, &y, &z);
    CHECK(std::abs(x * x + y * y + z * z - 1.0) < 1e-12);
    int o = (x > 0 ? 1 : 0) | (y > 0 ? 2 : 0) | (z > 0 ? 4 : 0);
    octant[o]++;
  }
  for (int o = 0; o < 8; ++o) {
    CHECK(octant[o] > n / 8 - n / 40);
    CHECK(octant[o] < n / 8 + n / 40);
  }
}
