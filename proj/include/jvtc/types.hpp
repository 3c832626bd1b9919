#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jvtc {

using Index = Eigen::Index;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Library-wide working precision. File formats stay float32 (see matrix_io).
using Scalar = double;
using Matrix = Mat<Scalar>;
using Vector = Vec<Scalar>;
using MatrixF = Mat<float>;

constexpr int kUnknownPersonId = -1;

/// Thrown when inputs violate a documented precondition or file contract.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a dense operation would exceed its configured size cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Returns x with each row scaled to unit L2 norm. Zero rows are rejected.
template <class Derived>
Mat<typename Derived::Scalar> row_normalized(const Eigen::MatrixBase<Derived>& x) {
  Mat<typename Derived::Scalar> out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const auto n = out.row(i).norm();
    if (n <= typename Derived::Scalar(0))
      throw ValidationError("row_normalized: zero row at index " + std::to_string(i));
    out.row(i) /= n;
  }
  return out;
}

template <class Derived>
Vec<typename Derived::Scalar> l2_normalized(const Eigen::MatrixBase<Derived>& x) {
  const auto n = x.norm();
  if (n <= typename Derived::Scalar(0)) throw ValidationError("l2_normalized: zero vector");
  return x / n;
}

/// Numerically stable softmax of a score vector.
template <class Derived>
Vec<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& z) {
  using S = typename Derived::Scalar;
  Vec<S> p = (z.array() - z.maxCoeff()).exp();
  p /= p.sum();
  return p;
}

/// Deterministic stream splitting: one master seed, independent substreams.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  // splitmix64 over the combined words
  std::uint64_t x = seed;
  for (std::uint64_t w : {a, b, c}) {
    x += 0x9e3779b97f4a7c15ULL + w;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
  }
  return x;
}

}  // namespace jvtc
