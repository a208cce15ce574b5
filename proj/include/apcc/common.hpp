#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace apcc {

//============================================================================
// Small fixed-size vector used for positions and per-axis parameters.

template<typename T>
struct Vec3 {
  T x{}, y{}, z{};

  constexpr Vec3() = default;
  constexpr Vec3(T vx, T vy, T vz) : x(vx), y(vy), z(vz) {}

  T& operator[](int i) { return (&x)[i]; }
  const T& operator[](int i) const { return (&x)[i]; }

  friend bool operator==(const Vec3&, const Vec3&) = default;

  Vec3 operator+(const Vec3& o) const { return {T(x + o.x), T(y + o.y), T(z + o.z)}; }
  Vec3 operator-(const Vec3& o) const { return {T(x - o.x), T(y - o.y), T(z - o.z)}; }

  template<typename U>
  Vec3<U> cast() const {
    return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
  }

  T maxComponent() const { return std::max(x, std::max(y, z)); }
  T minComponent() const { return std::min(x, std::min(y, z)); }
};

using Vec3d = Vec3<double>;
using Vec3i = Vec3<int32_t>;

template<typename T>
inline int64_t squaredDistance(const Vec3<T>& a, const Vec3<T>& b) {
  int64_t dx = int64_t(a.x) - b.x;
  int64_t dy = int64_t(a.y) - b.y;
  int64_t dz = int64_t(a.z) - b.z;
  return dx * dx + dy * dy + dz * dz;
}

template<typename T>
inline int64_t manhattanDistance(const Vec3<T>& a, const Vec3<T>& b) {
  return std::abs(int64_t(a.x) - b.x) + std::abs(int64_t(a.y) - b.y)
    + std::abs(int64_t(a.z) - b.z);
}

// Rounding convention used throughout the pipeline: half away from zero.
inline int64_t roundHalfAway(double v) {
  return v >= 0 ? int64_t(v + 0.5) : -int64_t(-v + 0.5);
}

//============================================================================
// Typed error hierarchy. Every failure surfaced by the library is one of
// these; the CLI maps them to exit code 1.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct TruncatedInput : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct MissingAttributes : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ContextIndexError : Error { using Error::Error; };
struct BitstreamUnderrun : Error { using Error::Error; };
struct CorruptStream : Error { using Error::Error; };
struct NotApccStream : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace apcc
