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

#include "hoadoa/baseline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "hoadoa/features.hpp"

namespace hoadoa {
namespace {

// Mean angular spacing of an n-point quasi-uniform grid: the linear scale
// of the 4pi/n area patch each point covers.
double mean_grid_spacing(size_t n) {
  return std::sqrt(4.0 * kPi / static_cast<double>(n));
}

// Solves the k x k system a x = b in place by Gaussian elimination with
// partial pivoting. Returns false on a (near-)singular matrix.
template <size_t K>
bool solve_dense(std::array<std::array<double, K>, K>& a,
                 std::array<double, K>& b) {
  for (size_t col = 0; col < K; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < K; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (size_t r = 0; r < K; ++r) {
      if (r == col) continue;
      const double m = a[r][col] / a[col][col];
      for (size_t c = col; c < K; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  for (size_t i = 0; i < K; ++i) b[i] /= a[i][i];
  return true;
}

// Legendre polynomial by the stable three-term recurrence.
double legendre_p(int n, double x) {
  double pm1 = 1.0, p = x;
  if (n == 0) return 1.0;
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = next;
  }
  return p;
}

double pattern(int order, double cos_gamma) {
  double num = 0.0, den = 0.0;
  for (int n = 0; n <= order; ++n) {
    num += (2.0 * n + 1.0) * legendre_p(n, cos_gamma);
    den += 2.0 * n + 1.0;
  }
  return num / den;
}

}  // namespace

Vec3 pseudo_intensity_vector(const ComplexSpectrogram& spec) {
  if (spec.channels < 4)
    throw std::invalid_argument("pseudo_intensity: needs FOA channels");
  Vec3 acc{};
  bool any = false;
  for (size_t t = 0; t < spec.frames; ++t) {
    for (size_t f = 0; f < spec.bins; ++f) {
      const IntensityFrameBin bin =
          intensity_bin(spec.at(t, f, 0), spec.at(t, f, 1), spec.at(t, f, 2),
                        spec.at(t, f, 3));
      if (bin.normalizer <= 0.0) continue;
      any = true;
      // Energy weight C times the normalized feature -I_a / C.
      acc.x -= bin.active[0];
      acc.y -= bin.active[1];
      acc.z -= bin.active[2];
    }
  }
  if (!any)
    throw std::invalid_argument("pseudo_intensity: all-silent input");
  return acc;
}

Direction pseudo_intensity_doa(const ComplexSpectrogram& spec) {
  return Direction::from_unit_vector(pseudo_intensity_vector(spec));
}

PowerMap steered_power_map(const ComplexSpectrogram& spec, int order,
                           const std::vector<Direction>& grid) {
  const size_t channels = static_cast<size_t>((order + 1) * (order + 1));
  if (order < 0 || order > 4 || spec.channels != channels)
    throw std::invalid_argument("steered_power_map: channel/order mismatch");
  if (grid.empty())
    throw std::invalid_argument("steered_power_map: empty grid");

  // Accumulated covariance R = sum_tf X X^H. The steered power
  // sum_tf |w . X|^2 equals w^T Re(R) w for real weights, so only the
  // real part is kept.
  std::vector<double> cov(channels * channels, 0.0);
  for (size_t t = 0; t < spec.frames; ++t) {
    for (size_t f = 0; f < spec.bins; ++f) {
      const std::complex<double>* x = &spec.at(t, f, 0);
      for (size_t a = 0; a < channels; ++a) {
        const std::complex<double> xa = x[a];
        for (size_t b = a; b < channels; ++b)
          cov[a * channels + b] +=
              xa.real() * x[b].real() + xa.imag() * x[b].imag();
      }
    }
  }
  for (size_t a = 0; a < channels; ++a)
    for (size_t b = 0; b < a; ++b)
      cov[a * channels + b] = cov[b * channels + a];

  std::vector<double> scale(channels);
  for (size_t k = 0; k < channels; ++k)
    scale[k] = 2.0 * acn_to_index(static_cast<int>(k)).order + 1.0;

  PowerMap map;
  map.grid = grid;
  map.order = order;
  map.power.resize(grid.size());
  std::vector<double> w(channels);
  for (size_t g = 0; g < grid.size(); ++g) {
    encode_direction(order, grid[g], w.data());
    for (size_t k = 0; k < channels; ++k) w[k] *= scale[k];
    double p = 0.0;
    for (size_t a = 0; a < channels; ++a) {
      const double* row = &cov[a * channels];
      double s = 0.0;
      for (size_t b = 0; b < channels; ++b) s += row[b] * w[b];
      p += w[a] * s;
    }
    map.power[g] = std::max(0.0, p);
  }
  return map;
}

Direction srp_doa(const PowerMap& map) {
  if (map.grid.empty() || map.grid.size() != map.power.size())
    throw std::invalid_argument("srp_doa: empty or malformed map");
  size_t peak = 0;
  for (size_t g = 1; g < map.grid.size(); ++g)
    if (map.power[g] > map.power[peak]) peak = g;

  const Vec3 c = map.grid[peak].unit_vector();
  const double window = 1.5 * mean_grid_spacing(map.grid.size());

  // Tangent basis at the peak.
  const Vec3 ref = std::abs(c.z) < 0.9 ? Vec3{0.0, 0.0, 1.0}
                                       : Vec3{1.0, 0.0, 0.0};
  Vec3 e1 = ref - dot(ref, c) * c;
  e1 = normalized(e1);
  const Vec3 e2{c.y * e1.z - c.z * e1.y, c.z * e1.x - c.x * e1.z,
                c.x * e1.y - c.y * e1.x};

  // Window members, gnomonic coordinates, and the local power floor.
  std::vector<std::array<double, 3>> pts;  // (a, b, power)
  double floor_power = map.power[peak];
  for (size_t g = 0; g < map.grid.size(); ++g) {
    if (angular_distance(map.grid[g], map.grid[peak]) > window) continue;
    const Vec3 u = map.grid[g].unit_vector();
    const double along = dot(u, c);
    if (along <= 0.0) continue;
    const Vec3 q = (1.0 / along) * u - c;
    pts.push_back({dot(q, e1), dot(q, e2), map.power[g]});
    floor_power = std::min(floor_power, map.power[g]);
  }
  // A flat window carries no refinement information (and feeds the fit
  // pure rounding noise), so the tie-broken peak stands.
  if (map.power[peak] - floor_power <= 0.0) return map.grid[peak];

  // Quadratic surface p(a,b) = b0 + b1 a + b2 b + b3 a^2 + b4 ab + b5 b^2
  // by least squares; its vertex refines the peak.
  if (pts.size() >= 6) {
    std::array<std::array<double, 6>, 6> ata{};
    std::array<double, 6> atp{};
    for (const auto& pt : pts) {
      const double basis[6] = {1.0,          pt[0],         pt[1],
                               pt[0] * pt[0], pt[0] * pt[1], pt[1] * pt[1]};
      for (size_t r = 0; r < 6; ++r) {
        atp[r] += basis[r] * pt[2];
        for (size_t col = 0; col < 6; ++col) ata[r][col] += basis[r] * basis[col];
      }
    }
    if (solve_dense(ata, atp)) {
      const double haa = 2.0 * atp[3], hbb = 2.0 * atp[5], hab = atp[4];
      const double det = haa * hbb - hab * hab;
      if (haa < 0.0 && det > 0.0) {
        const double va = (-atp[1] * hbb + atp[2] * hab) / det;
        const double vb = (-atp[2] * haa + atp[1] * hab) / det;
        if (va * va + vb * vb <= window * window) {
          const Vec3 refined = c + va * e1 + vb * e2;
          return Direction::from_unit_vector(refined);
        }
      }
    }
  }

  // Fallback: centroid with the local floor removed, so a flat plateau
  // contributes nothing and the estimate stays near the true lobe.
  Vec3 centroid{};
  double total = 0.0;
  for (const auto& pt : pts) {
    const double wgt = pt[2] - floor_power;
    centroid = centroid + wgt * normalized(c + pt[0] * e1 + pt[1] * e2);
    total += wgt;
  }
  if (total <= 0.0 || norm(centroid) == 0.0) return map.grid[peak];
  return Direction::from_unit_vector(centroid);
}

double beamwidth(int order) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("beamwidth: order must be in [1, 4]");
  // Bracket the first crossing of 0.5 by scanning outward, then bisect.
  const double step = kPi / 720.0;
  double lo = 0.0, hi = step;
  while (pattern(order, std::cos(hi)) > 0.5) {
    lo = hi;
    hi += step;
    if (hi > kPi)
      throw std::logic_error("beamwidth: pattern never crosses half power");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pattern(order, std::cos(mid)) > 0.5)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi) * 2.0 * 180.0 / kPi;
}

}  // namespace hoadoa
