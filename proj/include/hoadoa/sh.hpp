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
//
// Real spherical harmonics in the ambiX convention (ACN ordering, SN3D
// scaled by 1/sqrt(4pi) so that Y_0^0 = 1/sqrt(4pi)), direction geometry,
// and the angular-distance metric.
//
// Coordinate convention: x front, y left, z top. Elevation is measured
// from the horizontal plane, so the unit vector of (elevation t, azimuth p)
// is (cos t cos p, cos t sin p, sin t).

#ifndef HOADOA_SH_HPP_
#define HOADOA_SH_HPP_

#include <cstddef>
#include <vector>

namespace hoadoa {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Vec3 operator*(double s, const Vec3& v) {
  return {s * v.x, s * v.y, s * v.z};
}
inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
double norm(const Vec3& v);
// Throws std::invalid_argument on the zero vector.
Vec3 normalized(const Vec3& v);

// A point on the unit sphere. Construction normalizes: azimuth is wrapped
// into (-pi, pi], elevation is folded into [-pi/2, pi/2] (values beyond a
// pole reflect through it and rotate azimuth by pi), and at the poles the
// azimuth canonicalizes to 0 so equal directions compare equal.
class Direction {
 public:
  Direction() : el_(0.0), az_(0.0) {}
  Direction(double elevation, double azimuth);

  double elevation() const { return el_; }
  double azimuth() const { return az_; }

  Vec3 unit_vector() const;
  static Direction from_unit_vector(const Vec3& v);

  friend bool operator==(const Direction& a, const Direction& b) {
    return a.el_ == b.el_ && a.az_ == b.az_;
  }

 private:
  double el_;
  double az_;
};

struct SphericalPoint {
  double radius = 0.0;  // meters, non-negative
  Direction direction;
};

// Spherical-harmonic order n and degree m, |m| <= n.
struct ShIndex {
  int order = 0;
  int degree = 0;
};

// Ambisonics channel number, n^2 + n + m. Bijective with ShIndex.
int acn(const ShIndex& index);
// Inverse of acn. Throws std::invalid_argument for negative input.
ShIndex acn_to_index(int channel);

// Y_n^m(dir) = N_n^{|m|} P_n^{|m|}(sin elevation) * trig(|m| azimuth), with
// N_n^{|m|} = sqrt((2 - delta_{m0})/(4pi) * (n-|m|)!/(n+|m|)!) and Legendre
// functions WITHOUT the Condon-Shortley phase. trig is sin for m < 0 and
// cos for m >= 0.
double real_sh(const ShIndex& index, const Direction& dir);

// Plane-wave encoding coefficients: element at ACN k is
// real_sh(acn_to_index(k), dir). Length (order+1)^2.
// Throws std::invalid_argument unless 0 <= order <= 4.
std::vector<double> encode_direction(int order, const Direction& dir);
// Same, writing into caller storage of length (order+1)^2. No allocation;
// usable in per-grid-point inner loops.
void encode_direction(int order, const Direction& dir, double* out);

// Great-circle angle arccos(sin t1 sin t2 + cos t1 cos t2 cos(p1 - p2)),
// clamped into arccos domain. Radians in [0, pi]. Evaluated in haversine
// form so coincident inputs return exactly 0.
double angular_distance(const Direction& a, const Direction& b);

// Deterministic quasi-uniform spherical grid (golden-angle spiral).
// count >= 1; throws std::invalid_argument otherwise.
std::vector<Direction> fibonacci_grid(int count);

// x = r cos t cos p, y = r cos t sin p, z = r sin t.
Vec3 sph_to_cart(const SphericalPoint& p);
// Inverse. Throws std::invalid_argument on the zero vector.
SphericalPoint cart_to_sph(const Vec3& v);

// Multichannel Ambisonics time signal, channels in ACN order. For order 1
// the channels 0..3 are the FOA set W, Y, Z, X.
struct HoaSignal {
  int order = 1;              // in [1, 4]
  double sample_rate = 0.0;   // Hz
  std::vector<std::vector<double>> channels;

  static HoaSignal zeros(int order, double sample_rate, size_t length);
  size_t num_channels() const { return channels.size(); }
  size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
  // Checks the channel-count and equal-length invariants.
  bool valid() const;
};

}  // namespace hoadoa

#endif  // HOADOA_SH_HPP_
