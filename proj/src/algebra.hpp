// Exponentials in the three-dimensional Lie algebra spanned by the adiabat
// generators, written on (H, L, C):
//
//   E = [[0,-1,0],[-1,0,0],[0,0,0]]   (squeezing, multiplies mu)
//   F = [[0,0,0],[0,0,-1],[0,1,0]]    (rotation of L and C)
//   G = [[0,0,1],[0,0,0],[1,0,0]]
//
// with [E,F] = G, [E,G] = F, [F,G] = E. For X = xE + yF + zG one has
// X^3 = lambda^2 X with lambda^2 = x^2 - y^2 + z^2, hence
//
//   exp(X) = I + sinhc(lambda^2) X + coshc(lambda^2) X^2.

#pragma once

#include <Eigen/Dense>

namespace qotto::detail {

struct AlgebraElement {
    double e = 0.0;
    double f = 0.0;
    double g = 0.0;

    double lambda_sq() const { return e * e - f * f + g * g; }
};

// sinh(l)/l and (cosh(l) - 1)/l^2 as functions of l^2 (either sign).
double sinhc(double lambda_sq);
double coshc(double lambda_sq);

Eigen::Matrix3d to_matrix(const AlgebraElement& x);
Eigen::Matrix3d exp_algebra(const AlgebraElement& x);

}  // namespace qotto::detail
