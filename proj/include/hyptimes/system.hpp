#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyptimes/geometry.hpp"

namespace hyptimes {

enum class SystemKind { kMap, kVectorField };

// A smooth discrete- or continuous-time system on a flat chart.
// `eval` returns the map image (maps) or the field value (flows); the
// Jacobian is analytic when provided, otherwise a central finite difference
// with step 1e-6 (flagged through uses_fd_jacobian()).
struct SmoothSystem {
  SystemKind kind = SystemKind::kVectorField;
  int dimension = 0;
  ChartTopology topology;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian_fn;   // optional
  std::function<Vec(const Vec&)> inverse_eval;  // optional (invertible maps)
  std::vector<Vec> equilibria;                  // declared zeros / fixed points
  std::optional<double> jacobian_bound;         // known sup of the Jacobian norm
  Vec sample_lo;                                // probe-grid box
  Vec sample_hi;
  std::string name = "anonymous";
  std::map<std::string, double> params;

  bool uses_fd_jacobian() const { return !static_cast<bool>(jacobian_fn); }
  Vec value(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  bool has_inverse() const { return static_cast<bool>(inverse_eval); }
  SmoothSystem inverted() const;  // maps only; throws if no inverse is declared
};

inline constexpr double kFdJacobianStep = 1e-6;

}  // namespace hyptimes
