#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace anyonic {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Default absolute tolerance for comparisons of derived quantities.
inline constexpr double kTol = 1e-10;
// Below this probability an outcome is treated as impossible.
inline constexpr double kMinProbability = 1e-14;

enum class ErrorKind {
  MultiplicityUnsupported,
  InconsistentData,
  NonModular,
  UnknownCharge,
  InvalidDistribution,
  InadmissibleChannel,
  ZeroProbabilityOutcome,
  OracleTooLarge,
  NotAState,
  OddTwist,
  EvenTwist,
  UntunedSplitters,
  InvalidParameter,
  ParseError,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::MultiplicityUnsupported: return "MultiplicityUnsupported";
    case ErrorKind::InconsistentData: return "InconsistentData";
    case ErrorKind::NonModular: return "NonModular";
    case ErrorKind::UnknownCharge: return "UnknownCharge";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::InadmissibleChannel: return "InadmissibleChannel";
    case ErrorKind::ZeroProbabilityOutcome: return "ZeroProbabilityOutcome";
    case ErrorKind::OracleTooLarge: return "OracleTooLarge";
    case ErrorKind::NotAState: return "NotAState";
    case ErrorKind::OddTwist: return "OddTwist";
    case ErrorKind::EvenTwist: return "EvenTwist";
    case ErrorKind::UntunedSplitters: return "UntunedSplitters";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline bool near(cplx a, cplx b, double tol = kTol) { return std::abs(a - b) <= tol; }
inline bool near(double a, double b, double tol = kTol) { return std::abs(a - b) <= tol; }

// Integer power that treats 0^0 as 1 (std::pow on complex does not).
inline cplx ipow(cplx z, long n) {
  if (n < 0) return ipow(1.0 / z, -n);
  cplx r = 1.0;
  while (n > 0) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

inline cplx expi(double phase) { return std::polar(1.0, phase); }

}  // namespace anyonic
