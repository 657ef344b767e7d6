#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace jdmc {

// State dimension is a runtime value, but storage is capped so that every
// vector and matrix lives on the stack.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Bad user input: a configuration key or parameter violates a precondition.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Floating-point failure during simulation (non-SPD covariance, singular
/// Hermite matrix, non-finite weight).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string format_state(const Vec& x) {
    std::string out = "(";
    for (int i = 0; i < x.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(x[i]);
    }
    return out + ")";
}

}  // namespace jdmc
