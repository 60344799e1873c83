#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinchain {

using Real = double;
using Complex = std::complex<double>;

inline constexpr Real pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

using VectorR = Eigen::VectorXd;
using MatrixR = Eigen::MatrixXd;
using VectorC = Eigen::VectorXcd;
using MatrixC = Eigen::MatrixXcd;

using Vec2 = Eigen::Matrix<Complex, 2, 1>;
using Vec4 = Eigen::Matrix<Complex, 4, 1>;
using Vec16 = Eigen::Matrix<Complex, 16, 1>;
using Mat2 = Eigen::Matrix<Complex, 2, 2>;
using Mat4 = Eigen::Matrix<Complex, 4, 4>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat16 = Eigen::Matrix<Complex, 16, 16>;

// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The channel has a mode at +-J and second-order sums diverge.
class PerturbationInvalid : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace spinchain
