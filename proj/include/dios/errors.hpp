#pragma once

#include <stdexcept>
#include <string>

namespace dios {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inversion target lies outside the validated range of the function.
struct UnreachableTarget : Error { using Error::Error; };
/// No admissible power map yields a finite exponential envelope on the grid.
struct EnvelopeDiverged : Error { using Error::Error; };
/// A bisection bracket could not be established within the search cap.
struct NonConvergent : Error { using Error::Error; };
struct EmptySampleSet : Error { using Error::Error; };
struct ConfigMismatch : Error { using Error::Error; };
struct NoDelayFreeOutput : Error { using Error::Error; };
/// Candidate lacks a function required by the selected estimate form.
struct MissingFunction : Error { using Error::Error; };
struct NoCertificate : Error { using Error::Error; };
/// Invalid CLI/config input; maps to exit code 2.
struct ConfigError : Error { using Error::Error; };

/// |x(t)| crossed the blow-up guard; possible loss of forward completeness
/// at the simulated scale.
struct BlowUp : Error {
  double time;
  explicit BlowUp(double t)
      : Error("state norm exceeded blow-up guard at t=" + std::to_string(t)),
        time(t) {}
};

}  // namespace dios
