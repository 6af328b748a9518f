#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dnclab {

enum class ErrorCode {
  domain_error,
  stabilization_failure,
  not_transversal,
  not_glk,
  index_error,
  depth_mismatch,
  jacobian_mismatch,
  off_manifold,
  no_convergence,
  radius_exceeded,
  outside_chart,
  fiber_mismatch,
  not_composable,
  empty_first_level,
  dimension_too_small,
  missing_witness,
  not_covering,
  not_transverse,
  precondition_failed,
  unknown_suite,
  config_error,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::stabilization_failure: return "StabilizationFailure";
    case ErrorCode::not_transversal: return "NotTransversal";
    case ErrorCode::not_glk: return "NotGLK";
    case ErrorCode::index_error: return "IndexError";
    case ErrorCode::depth_mismatch: return "DepthMismatch";
    case ErrorCode::jacobian_mismatch: return "JacobianMismatch";
    case ErrorCode::off_manifold: return "OffManifold";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::radius_exceeded: return "RadiusExceeded";
    case ErrorCode::outside_chart: return "OutsideChart";
    case ErrorCode::fiber_mismatch: return "FiberMismatch";
    case ErrorCode::not_composable: return "NotComposable";
    case ErrorCode::empty_first_level: return "EmptyFirstLevel";
    case ErrorCode::dimension_too_small: return "DimensionTooSmall";
    case ErrorCode::missing_witness: return "MissingWitness";
    case ErrorCode::not_covering: return "NotCovering";
    case ErrorCode::not_transverse: return "NotTransverse";
    case ErrorCode::precondition_failed: return "PreconditionFailed";
    case ErrorCode::unknown_suite: return "UnknownSuite";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "Error";
}

/// Base of every error raised by the library. The code identifies the
/// failure class; the message carries the offending values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
 public:
  explicit CodedError(const std::string& what) : Error(C, what) {}
};

using DomainError = CodedError<ErrorCode::domain_error>;
using StabilizationFailure = CodedError<ErrorCode::stabilization_failure>;
using NotTransversal = CodedError<ErrorCode::not_transversal>;
using NotGLK = CodedError<ErrorCode::not_glk>;
using IndexError = CodedError<ErrorCode::index_error>;
using DepthMismatch = CodedError<ErrorCode::depth_mismatch>;
using JacobianMismatch = CodedError<ErrorCode::jacobian_mismatch>;
using OffManifold = CodedError<ErrorCode::off_manifold>;
using NoConvergence = CodedError<ErrorCode::no_convergence>;
using RadiusExceeded = CodedError<ErrorCode::radius_exceeded>;
using OutsideChart = CodedError<ErrorCode::outside_chart>;
using FiberMismatch = CodedError<ErrorCode::fiber_mismatch>;
using NotComposable = CodedError<ErrorCode::not_composable>;
using EmptyFirstLevel = CodedError<ErrorCode::empty_first_level>;
using DimensionTooSmall = CodedError<ErrorCode::dimension_too_small>;
using MissingWitness = CodedError<ErrorCode::missing_witness>;
using NotCovering = CodedError<ErrorCode::not_covering>;
using NotTransverse = CodedError<ErrorCode::not_transverse>;
using PreconditionFailed = CodedError<ErrorCode::precondition_failed>;
using UnknownSuite = CodedError<ErrorCode::unknown_suite>;
using ConfigError = CodedError<ErrorCode::config_error>;

}  // namespace dnclab
