#pragma once

#include <stdexcept>
#include <string>

namespace trapmodes {

/// Invalid waveguide description or configuration value.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Symmetry class for which the test-function construction degenerates.
class InadmissibleClass : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requested for a setting it does not cover.
class UnsupportedSetting : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point outside the open free region of the guide.
class OutOfDomain : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Grid steps incompatible with the obstacle lattice.
class GridMisaligned : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimized quotient did not clear the threshold; margin carries the best
/// value found (negative or below the certification slack).
class CertificationFailed : public std::runtime_error {
 public:
  CertificationFailed(int m, double margin)
      : std::runtime_error("certification failed for class m=" + std::to_string(m) +
                           " (best margin " + std::to_string(margin) + ")"),
        m_(m),
        margin_(margin) {}

  int m() const { return m_; }
  double margin() const { return margin_; }

 private:
  int m_;
  double margin_;
};

}  // namespace trapmodes
