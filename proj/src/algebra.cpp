#include "algebra.hpp"

#include <cmath>

namespace qotto::detail {

namespace {
// |lambda| below 1e-4 switches to the 4th-order series.
constexpr double kSeriesRadiusSq = 1e-8;
}  // namespace

double sinhc(double lambda_sq) {
    if (std::abs(lambda_sq) < kSeriesRadiusSq) return 1.0 + lambda_sq / 6.0 + lambda_sq * lambda_sq / 120.0;
    if (lambda_sq > 0.0) {
        const double l = std::sqrt(lambda_sq);
        return std::sinh(l) / l;
    }
    const double w = std::sqrt(-lambda_sq);
    return std::sin(w) / w;
}

double coshc(double lambda_sq) {
    if (std::abs(lambda_sq) < kSeriesRadiusSq) return 0.5 + lambda_sq / 24.0 + lambda_sq * lambda_sq / 720.0;
    if (lambda_sq > 0.0) {
        const double half = 0.5 * std::sqrt(lambda_sq);
        const double sh = std::sinh(half);
        return 2.0 * sh * sh / lambda_sq;
    }
    const double half = 0.5 * std::sqrt(-lambda_sq);
    const double sn = std::sin(half);
    return -2.0 * sn * sn / lambda_sq;
}

Eigen::Matrix3d to_matrix(const AlgebraElement& x) {
    Eigen::Matrix3d m;
    m << 0.0, -x.e, x.g,
        -x.e, 0.0, -x.f,
        x.g, x.f, 0.0;
    return m;
}

Eigen::Matrix3d exp_algebra(const AlgebraElement& x) {
    const double l2 = x.lambda_sq();
    const Eigen::Matrix3d m = to_matrix(x);
    return Eigen::Matrix3d::Identity() + sinhc(l2) * m + coshc(l2) * (m * m);
}

}  // namespace qotto::detail
