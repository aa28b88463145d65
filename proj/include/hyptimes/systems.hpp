#pragma once

#include <string>
#include <vector>

#include "hyptimes/system.hpp"

namespace hyptimes {

// Constant field on the 2-torus (irrational slope by default): no
// equilibria, identically zero derivative of the field.
SmoothSystem constant_torus_field(double vx = 1.0, double vy = 1.4142135623730951);

// x' = A x on R^d with the origin declared as equilibrium.
SmoothSystem linear_field(const Mat& a);

// x -> A x as a map; invertible when A is.
SmoothSystem linear_map(const Mat& a);

// Planar field with the unit circle as a limit cycle (radial rate -2 on the
// cycle). The repelling variant negates the radial part, which turns the
// origin into an attracting focus and the cycle into a repeller.
SmoothSystem limit_cycle_field(bool repelling = false);

// theta' = cos(theta) on the circle: attracting point at pi/2, repelling at
// 3 pi / 2.
SmoothSystem north_south_circle_field();

// Time-1 map of the north-south field (fixed step embedding); the two
// equilibria are exactly fixed.
SmoothSystem north_south_circle_map(double embed_dt = 0.02);

// Time-1 map of the gradient ascent of phi(t) = t^4 sin(1/t) on the circle
// [-1/pi, 1/pi). Finitely many resolvable alternating attracting/repelling
// fixed points accumulate at 0; the resolvable ones are declared.
SmoothSystem sinus_sinks_map(double embed_dt = 0.02);

// Product of sinus_sinks_map and north_south_circle_map on the 2-torus
// chart [-1/pi, 1/pi) x [0, 2 pi).
SmoothSystem product_sinus_north_south_map(double embed_dt = 0.02);

struct BowenParams {
  double eps = 0.08;        // strength of the dissipative push toward the loop
  bool asymmetric = false;  // shift the eigenvalues of the first saddle
  double c_stable = -0.5;   // added to the stable eigenvalue (asymmetric only)
  double c_unstable = -0.3; // added to the unstable eigenvalue (asymmetric only)
  double bump_radius = 0.5; // support radius of the local modification
};

// Double homoclinic loop ("figure eight") through two saddles on the
// cylinder [0, 2 pi) x R, made attracting by a dissipation that vanishes on
// the loop. The asymmetric variant shifts the eigenvalues of the saddle at
// the origin to (-sqrt2 + c_stable, sqrt2 + c_unstable) while keeping both
// separatrix branches exactly invariant.
SmoothSystem bowen_type_field(const BowenParams& params = {});

// System description from a JSON document: dimension, topology, field (or
// map) component expressions, optional analytic Jacobian, declared
// equilibria, sampling box, and named parameters usable in the expressions.
SmoothSystem from_config(const std::string& json_text);

std::vector<std::string> builtin_names();

// Builtins by name with default parameters.
SmoothSystem make_builtin(const std::string& name);

}  // namespace hyptimes
