#pragma once

#include <stdexcept>
#include <string>

namespace wapss {

// Base class for all library errors. Every throw site uses a subclass so
// callers can dispatch on the failure kind.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- model / serialization ---
struct ParseError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct NonFinite : Error {
  using Error::Error;
};

// --- modal analysis ---
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct ZeroEigenvalue : Error {
  using Error::Error;
};
struct DefectiveMatrix : Error {
  using Error::Error;
};
struct ZeroVector : Error {
  using Error::Error;
};

// --- benchmark construction / calibration ---
struct InvalidParams : Error {
  using Error::Error;
};
struct CalibrationFailed : Error {
  using Error::Error;
};

// --- observer design ---
struct NotDetectable : Error {
  using Error::Error;
};
struct RateInfeasible : Error {
  using Error::Error;
};
struct NotHurwitz : Error {
  using Error::Error;
};

// --- certificates / linear algebra ---
struct IllConditioned : Error {
  using Error::Error;
};
struct RiccatiFailure : Error {
  using Error::Error;
};

// --- simulation ---
struct Overflow : Error {
  using Error::Error;
};
struct GridMisaligned : Error {
  using Error::Error;
};
struct UnstableClosedLoop : Error {
  using Error::Error;
};

// --- controller tuning ---
struct NoStabilizingGain : Error {
  using Error::Error;
};

}  // namespace wapss
