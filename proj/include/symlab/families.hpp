#pragma once

#include "symlab/alexander.hpp"

namespace symlab {

// A (1 - |x - c|^2 / R^2)^k on |x - c| < R. Smoothness order is k - 1.
ScalarTimeField radial_bump(double amplitude, double radius, int k = 3);
ScalarTimeField offset_bump(double amplitude, double radius, const Vec2& center, int k = 3);

// Bump of radius r whose center runs once around the circle of radius rho.
ScalarTimeField moving_bump(double amplitude, double radius, double rho, int k = 3);

// Radial bump strong enough that the time-one map rotates the center by more than pi.
ScalarTimeField twist(double amplitude = 0.5, double radius = 0.8);

// (q^2 + p^2) / 2, not compactly supported.
ScalarTimeField rotation_hamiltonian();

// sin^2(pi t) reparametrization of an autonomous field: a loop.
ScalarTimeField reparam_loop(const ScalarTimeField& h);

// H(s, t, x) = s A (1 - |x|^2/r^2)^4 bump of radius r centered at rho s (cos 2 pi t, sin 2 pi t); H(0) = 0.
TwoParameterField homotopy_family(double amplitude = 0.05, double radius = 0.4, double rho = 0.3);

}  // namespace symlab
