#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace carnot {

/// Exact rational scalar. Expression templates are disabled so the type
/// composes with Eigen storage and generic code.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using VectorXq = Vector<Rational>;
using MatrixXq = Matrix<Rational>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: index ranges, inconsistent sizes, unparsable files.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix sizes that do not match the owning algebra.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (r <= 0, p > n, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Unknown builtin name or unusable command-line request.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// The chart is rank deficient at the requested parameter.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

template <typename Scalar>
inline constexpr bool is_exact_v = std::is_same_v<Scalar, Rational>;

template <typename Scalar>
double to_double(const Scalar& s) {
  if constexpr (is_exact_v<Scalar>) {
    return s.template convert_to<double>();
  } else {
    return static_cast<double>(s);
  }
}

template <typename Scalar>
Scalar abs_value(const Scalar& s) {
  if constexpr (is_exact_v<Scalar>) {
    return boost::multiprecision::abs(s);
  } else {
    return std::abs(s);
  }
}

template <typename Scalar>
Vector<double> to_double(const Vector<Scalar>& v) {
  Vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = to_double(v(i));
  return out;
}

template <typename Scalar>
Matrix<double> to_double(const Matrix<Scalar>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out(i, j) = to_double(m(i, j));
  return out;
}

/// Parses "a", "a/b", or a decimal literal into an exact rational.
Rational parse_rational(const std::string& text);

/// Exact rational value of a finite double (every double is a dyadic rational).
Rational rational_from_double(double value);

std::string to_string(const Rational& q);

}  // namespace carnot
