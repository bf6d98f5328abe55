#ifndef MACEC_TYPES_HPP
#define MACEC_TYPES_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace macec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A parameter violates its domain contract (shape, sign, range).
class InvalidParameter : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// An energy-cooperation policy violates the per-slot row budget
// or would drive a transmit power negative.
class InfeasiblePolicy : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A request exceeds a hard implementation limit (e.g. subset
// enumeration for too many users).
class SizeLimit : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Users are indexed 0..K-1; subsets of users are bitmasks over those
// indices. All rates are in nats per channel use unless converted at
// the output layer.
using SubsetMask = std::uint32_t;

inline constexpr int kMaxUsers = 16;

// Absolute slack used when checking polytope constraints, so that
// policies emitted by the optimizer survive their own feasibility check.
inline constexpr double kFeasibilityTol = 1e-9;

}  // namespace macec

#endif
