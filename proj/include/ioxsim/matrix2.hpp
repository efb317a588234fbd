#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

namespace ioxsim {

// Closed-form (cofactor) inverse of a 2x2 complex matrix. nullopt when the
// determinant is zero to within a few ulps of its two products.
inline std::optional<Eigen::Matrix2cd> inverse2x2(const Eigen::Matrix2cd& m) {
    const auto ad = m(0, 0) * m(1, 1);
    const auto bc = m(0, 1) * m(1, 0);
    const auto det = ad - bc;
    const double scale = std::abs(ad) + std::abs(bc);
    if (std::abs(det) <= 64.0 * std::numeric_limits<double>::epsilon() * scale || det == 0.0) {
        return std::nullopt;
    }
    Eigen::Matrix2cd inv;
    inv << m(1, 1), -m(0, 1),
           -m(1, 0), m(0, 0);
    return inv / det;
}

}  // namespace ioxsim
