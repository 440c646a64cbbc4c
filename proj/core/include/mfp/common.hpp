#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Thrown when a non-finite value shows up where the numerics contract
/// forbids one (losses, gradients, particle positions, optimizer steps).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double offending)
      : std::runtime_error(what + " (offending value: " + std::to_string(offending) + ")"),
        value(offending) {}
  explicit NumericError(const std::string& what) : std::runtime_error(what), value(0) {}
  double value;
};

/// Thrown when a config file fails validation; carries the field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field(field) {}
  std::string field;
};

/// Training abort: non-finite or diverging loss, with the epoch it happened at.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, double loss)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                           " (loss = " + std::to_string(loss) + ")"),
        epoch(epoch), loss(loss) {}
  int epoch;
  double loss;
};

inline void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericError(std::string("non-finite ") + what, x);
}

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    double bad = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (!std::isfinite(m(i, j))) { bad = m(i, j); goto found; }
  found:
    throw NumericError(std::string("non-finite entry in ") + what, bad);
  }
}

}  // namespace mfp
