#pragma once
// Scalar field, error taxonomy and the small shared value types.
//
// The engine runs in two scalar modes: exact rationals (boost
// multiprecision) for frame-level geometry, and doubles for pointwise work
// that involves transcendental functions. Generic code is templated on the
// scalar type T and uses the helpers below to stay mode-agnostic.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acbm {

using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure; carries the byte offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

// Evaluation hit a singularity: division by zero, ln/sqrt of a
// non-positive argument, or a derivative thereof.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class SlotError : public Error {
 public:
  using Error::Error;
};

// A theorem checker was pointed at a manifold of the wrong class.
class BranchError : public Error {
 public:
  using Error::Error;
};

// An operation refused to run on an invalid almost contact B-metric
// structure.
class StructureError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Scalar helpers

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

inline bool scalar_is_zero(const Rational& v, double /*tol*/) {
  return v.is_zero();
}
inline bool scalar_is_zero(double v, double tol) { return std::fabs(v) <= tol; }

inline double abs_as_double(const Rational& v) {
  return std::fabs(to_double(v));
}
inline double abs_as_double(double v) { return std::fabs(v); }

// Accepts "p/q", integers and decimal literals ("-3", "2.5").
Rational rational_from_string(std::string_view text);

// Canonical form: "p" when the denominator is 1, "p/q" otherwise.
std::string rational_to_string(const Rational& r);

// ---------------------------------------------------------------------------
// Points and covectors

template <class T>
using FrameVec = std::vector<T>;  // a tangent vector in frame components

template <class T>
using Point = std::vector<T>;  // chart coordinates

// A 1-form's components in a chosen frame at a point.
template <class T>
struct Covector {
  std::vector<T> c;

  Covector() = default;
  explicit Covector(std::size_t d) : c(d, T(0)) {}
  explicit Covector(std::vector<T> comps) : c(std::move(comps)) {}

  std::size_t size() const { return c.size(); }
  T& operator[](std::size_t i) { return c[i]; }
  const T& operator[](std::size_t i) const { return c[i]; }

  // pairing with a tangent vector
  T apply(const FrameVec<T>& v) const {
    T acc(0);
    for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * v[i];
    return acc;
  }
};

template <class T>
Covector<T> operator+(const Covector<T>& a, const Covector<T>& b) {
  Covector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <class T>
Covector<T> operator-(const Covector<T>& a, const Covector<T>& b) {
  Covector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

template <class T>
Covector<T> operator-(const Covector<T>& a) {
  Covector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

template <class T>
Covector<T> operator*(const T& s, const Covector<T>& a) {
  Covector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

inline Covector<double> operator*(double s, const Covector<double>& a) {
  Covector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

template <class T>
double max_abs(const Covector<T>& a) {
  double m = 0;
  for (const auto& v : a.c) m = std::max(m, abs_as_double(v));
  return m;
}

template <class T>
double max_abs_diff(const Covector<T>& a, const Covector<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, abs_as_double(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Check results (validation reports and the acceptance machinery share these)

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::vector<int> where;  // offending index tuple, empty when pass
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(CheckResult c) { checks.push_back(std::move(c)); }
};

// ---------------------------------------------------------------------------
// Deterministic RNG draws (stable across platforms, unlike std distributions)

inline std::int64_t draw_int(std::mt19937_64& rng, std::int64_t lo,
                             std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

inline double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// uniform in [lo, hi)
inline double draw_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * draw_unit(rng);
}

// small random rational p/q with |p| <= num_range, 1 <= q <= den_range
inline Rational draw_rational(std::mt19937_64& rng, std::int64_t num_range,
                              std::int64_t den_range) {
  const std::int64_t p = draw_int(rng, -num_range, num_range);
  const std::int64_t q = draw_int(rng, 1, den_range);
  return Rational(p, q);
}

}  // namespace acbm
