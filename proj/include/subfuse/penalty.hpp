#pragma once

#include <cmath>

#include "subfuse/dataset.hpp"

namespace subfuse {

// Scalar thresholding / robust-loss kernel shared by the solver and the
// tuning code. theta is the proximal map of the penalty, huber_h the induced
// robust loss, and psi(z) = z - theta(z) its half-derivative: H'(z) = 2 psi(z).

/// L1: soft thresholding, zero on the closed band |z| <= lambda.
/// L2: linear shrinkage z / (1 + lambda).
inline double theta(double z, const PenaltySpec& penalty) {
    const double lambda = penalty.lambda;
    if (penalty.kind == PenaltyKind::L1) {
        if (z > lambda) return z - lambda;
        if (z < -lambda) return z + lambda;
        return 0.0;
    }
    return z / (1.0 + lambda);
}

/// L1: Huber's loss, quadratic inside the band, linear outside.
/// L2: lambda z^2 / (1 + lambda).
inline double huber_h(double z, const PenaltySpec& penalty) {
    const double lambda = penalty.lambda;
    if (penalty.kind == PenaltyKind::L1) {
        const double a = std::abs(z);
        if (a <= lambda) return z * z;
        return 2.0 * lambda * a - lambda * lambda;
    }
    return lambda * z * z / (1.0 + lambda);
}

/// psi(z) = z - theta(z); clipped identity for L1, lambda z / (1+lambda) for L2.
inline double psi(double z, const PenaltySpec& penalty) {
    const double lambda = penalty.lambda;
    if (penalty.kind == PenaltyKind::L1) {
        if (z > lambda) return lambda;
        if (z < -lambda) return -lambda;
        return z;
    }
    return lambda * z / (1.0 + lambda);
}

/// Penalty value P(g) = 2 |g|^nu / nu (lambda not included).
inline double penalty_value(double g, const PenaltySpec& penalty) {
    if (penalty.kind == PenaltyKind::L1) return 2.0 * std::abs(g);
    return g * g;
}

}  // namespace subfuse
