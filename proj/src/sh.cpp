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

#include "hoadoa/sh.hpp"

#include <cmath>
#include <stdexcept>

namespace hoadoa {

namespace {

constexpr double kHalfPi = kPi / 2.0;
constexpr double kTwoPi = 2.0 * kPi;

// Wrap into (-pi, pi].
double wrap_pi(double a) {
  double w = a - kTwoPi * std::ceil((a - kPi) / kTwoPi);
  if (w <= -kPi) w = kPi;  // guard against rounding at the seam
  if (w > kPi) w = kPi;
  return w;
}

// Associated Legendre P_n^m(x) for m >= 0, WITHOUT Condon-Shortley phase.
// Standard three-term recurrence, stable for the small n used here.
double legendre_nocs(int n, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    double s = std::sqrt(std::fmax(0.0, 1.0 - x * x));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= fact * s;
      fact += 2.0;
    }
  }
  if (n == m) return pmm;
  double pmm1 = x * (2.0 * m + 1.0) * pmm;
  if (n == m + 1) return pmm1;
  double p = 0.0;
  for (int nn = m + 2; nn <= n; ++nn) {
    p = (x * (2.0 * nn - 1.0) * pmm1 - (nn + m - 1.0) * pmm) / (nn - m);
    pmm = pmm1;
    pmm1 = p;
  }
  return p;
}

double sn3d_norm(int n, int m_abs) {
  double ratio = 1.0;  // (n-|m|)! / (n+|m|)!
  for (int k = n - m_abs + 1; k <= n + m_abs; ++k) ratio /= k;
  double two_minus_delta = (m_abs == 0) ? 1.0 : 2.0;
  return std::sqrt(two_minus_delta / (4.0 * kPi) * ratio);
}

}  // namespace

double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
  return {v.x / n, v.y / n, v.z / n};
}

Direction::Direction(double elevation, double azimuth) {
  if (!std::isfinite(elevation) || !std::isfinite(azimuth))
    throw std::invalid_argument("direction angles must be finite");
  double el = wrap_pi(elevation);
  double az = azimuth;
  if (el > kHalfPi) {  // reflect through the north pole
    el = kPi - el;
    az += kPi;
  } else if (el < -kHalfPi) {  // reflect through the south pole
    el = -kPi - el;
    az += kPi;
  }
  az = wrap_pi(az);
  if (el == kHalfPi || el == -kHalfPi) az = 0.0;
  el_ = el;
  az_ = az;
}

Vec3 Direction::unit_vector() const {
  double c = std::cos(el_);
  return {c * std::cos(az_), c * std::sin(az_), std::sin(el_)};
}

Direction Direction::from_unit_vector(const Vec3& v) {
  Vec3 u = normalized(v);
  double el = std::asin(std::fmin(1.0, std::fmax(-1.0, u.z)));
  double az = (u.x == 0.0 && u.y == 0.0) ? 0.0 : std::atan2(u.y, u.x);
  return Direction(el, az);
}

int acn(const ShIndex& index) {
  return index.order * index.order + index.order + index.degree;
}

ShIndex acn_to_index(int channel) {
  if (channel < 0) throw std::invalid_argument("ACN must be non-negative");
  int n = static_cast<int>(std::sqrt(static_cast<double>(channel)));
  // Rounding correction so n = floor(sqrt(channel)) exactly.
  while ((n + 1) * (n + 1) <= channel) ++n;
  while (n * n > channel) --n;
  return {n, channel - n * n - n};
}

double real_sh(const ShIndex& index, const Direction& dir) {
  int n = index.order;
  int m = index.degree;
  int ma = m < 0 ? -m : m;
  double p = legendre_nocs(n, ma, std::sin(dir.elevation()));
  double trig = (m < 0) ? std::sin(ma * dir.azimuth())
                        : std::cos(ma * dir.azimuth());
  return sn3d_norm(n, ma) * p * trig;
}

std::vector<double> encode_direction(int order, const Direction& dir) {
  if (order < 0 || order > 4)
    throw std::invalid_argument("encode_direction: order must be in [0, 4]");
  std::vector<double> out((order + 1) * (order + 1));
  encode_direction(order, dir, out.data());
  return out;
}

void encode_direction(int order, const Direction& dir, double* out) {
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m)
      out[n * n + n + m] = real_sh({n, m}, dir);
}

double angular_distance(const Direction& a, const Direction& b) {
  // Haversine form of arccos(sin t1 sin t2 + cos t1 cos t2 cos(p1 - p2)).
  // Identical inputs give exactly 0; near-coincident pairs keep full
  // precision where the plain arccos loses ~1e-8.
  double sde = std::sin(0.5 * (a.elevation() - b.elevation()));
  double sda = std::sin(0.5 * (a.azimuth() - b.azimuth()));
  double h = sde * sde +
             std::cos(a.elevation()) * std::cos(b.elevation()) * sda * sda;
  return 2.0 * std::asin(std::fmin(1.0, std::sqrt(std::fmax(0.0, h))));
}

std::vector<Direction> fibonacci_grid(int count) {
  if (count < 1) throw std::invalid_argument("fibonacci_grid: count >= 1");
  std::vector<Direction> grid;
  grid.reserve(count);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    // Midpoint offset keeps points away from the poles for any count.
    double z = 1.0 - (2.0 * i + 1.0) / count;
    double el = std::asin(std::fmin(1.0, std::fmax(-1.0, z)));
    double az = golden_angle * i;
    grid.emplace_back(el, az);
  }
  return grid;
}

Vec3 sph_to_cart(const SphericalPoint& p) {
  return p.radius * p.direction.unit_vector();
}

SphericalPoint cart_to_sph(const Vec3& v) {
  return {norm(v), Direction::from_unit_vector(v)};
}

HoaSignal HoaSignal::zeros(int order, double sample_rate, size_t length) {
  HoaSignal s;
  s.order = order;
  s.sample_rate = sample_rate;
  s.channels.assign(static_cast<size_t>((order + 1) * (order + 1)),
                    std::vector<double>(length, 0.0));
  return s;
}

bool HoaSignal::valid() const {
  if (order < 1 || order > 4) return false;
  size_t want = static_cast<size_t>((order + 1) * (order + 1));
  if (channels.size() != want) return false;
  for (const auto& c : channels)
    if (c.size() != channels[0].size()) return false;
  return true;
}

}  // namespace hoadoa
