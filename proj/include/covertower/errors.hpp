// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace covertower {

/// Failure category; the CLI maps it onto its exit code.
enum class ErrorKind { Usage, Numerical, Statistical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define COVERTOWER_ERROR(Name, Kind)                                                  \
  class Name : public Error {                                                         \
   public:                                                                            \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name ": " + what) {} \
  };

// lattice_tower
COVERTOWER_ERROR(QuantizationError, Usage)
COVERTOWER_ERROR(DepthError, Usage)
COVERTOWER_ERROR(LevelOutOfRange, Usage)
COVERTOWER_ERROR(LatticeError, Usage)
// fock_kernel / currents
COVERTOWER_ERROR(DomainError, Usage)
// quotient_kernel
COVERTOWER_ERROR(TruncationError, Numerical)
COVERTOWER_ERROR(DivisionDegenerate, Numerical)
COVERTOWER_ERROR(BaseLocusError, Numerical)
// sections
COVERTOWER_ERROR(FrameDegenerate, Numerical)
// zeros
COVERTOWER_ERROR(BoundaryZeroError, Numerical)
COVERTOWER_ERROR(NonIntegerWinding, Numerical)
COVERTOWER_ERROR(ZeroCountMismatch, Numerical)
// experiments
COVERTOWER_ERROR(ConfigError, Usage)
COVERTOWER_ERROR(SamplingFailure, Numerical)
COVERTOWER_ERROR(StatisticalFailure, Statistical)

#undef COVERTOWER_ERROR

}  // namespace covertower
