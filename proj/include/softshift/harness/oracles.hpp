#pragma once
// Oracles that are independent of the library's evaluation paths.

#include "softshift/numkit/linalg.hpp"
#include "softshift/shift_analysis.hpp"

namespace softshift::harness {

using numkit::Matrix;
using numkit::Vector;

// Central differences of the loss, (L(x + h e_i) - L(x - h e_i)) / 2h.
// Requires h in [1e-8, 1e-3] (PreconditionViolation otherwise).
Vector fd_gradient(const Matrix& A, const Vector& b, const Vector& x, double h = 1e-5);

// Richardson extrapolation of two central differences (h and h/2), error
// O(h^4). A second oracle for cross-checking fd_gradient.
Vector richardson_gradient(const Matrix& A, const Vector& b, const Vector& x, double h = 1e-3);

// delta_b evaluated in 50-digit binary floating point (Boost.Multiprecision)
// and rounded to double. Throws ScaleExceeded when n * d > 64.
Vector highprec_delta_b(const shift::ShiftPair& pair);

inline constexpr std::size_t kHighprecMaxEntries = 64;

}  // namespace softshift::harness
