#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chansel {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Data/schema problems in user-provided inputs (scenario files, manifests,
// WAV headers). The CLI maps these to exit code 2.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (singular factorizations, degenerate denominators).
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double db_from_power_ratio(double ratio) { return 10.0 * std::log10(ratio); }
inline double power_ratio_from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double amplitude_ratio_from_db(double db) { return std::pow(10.0, db / 20.0); }

inline double signal_energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

inline double signal_rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(signal_energy(x) / static_cast<double>(x.size()));
}

}  // namespace chansel
