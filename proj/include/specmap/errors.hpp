#pragma once

#include <stdexcept>
#include <string>

namespace specmap {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RepresentationError : Error {
  using Error::Error;
};
struct UnsupportedOrder : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};

// Integrator could not meet the requested tolerance.
struct AccuracyError : Error {
  double achieved;
  AccuracyError(const std::string& msg, double res) : Error(msg), achieved(res) {}
};

// Winding count does not match after refinement, or a root escaped its cell.
struct RootSearchError : Error {
  using Error::Error;
};
// Two roots closer than the isolation limit (violates simplicity (A-1)).
struct MultiplicityError : Error {
  using Error::Error;
};
// Residue circle would intersect another eigenvalue's exclusion zone.
struct RadiusError : Error {
  using Error::Error;
};
// Weight matrix violates the one-nonzero-entry pattern.
struct StructureError : Error {
  using Error::Error;
};
struct DegenerateWeightError : Error {
  using Error::Error;
};
struct PoleProximityError : Error {
  using Error::Error;
};
struct ExtrapolationError : Error {
  double residual;
  ExtrapolationError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

// Linear solve near an eigenvalue; carries the condition estimate.
struct ConditionedError : Error {
  double condition;
  ConditionedError(const std::string& msg, double cond) : Error(msg), condition(cond) {}
};

// Truncated main equation is singular or near-singular; carries sigma_min.
struct SolvabilityAlarm : Error {
  double sigma_min;
  SolvabilityAlarm(const std::string& msg, double smin) : Error(msg), sigma_min(smin) {}
};

// Recovered quantities disagree between independent spectral parameters.
struct InconsistencyError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace specmap
