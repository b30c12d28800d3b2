#pragma once

#include "subfuse/dataset.hpp"
#include "subfuse/rng.hpp"

namespace subfuse {

/// Per-row inclusion probabilities for Poisson sampling.
/// Invariants: 0 < pi_e <= 1 and sum(pi) = nominal_size (to 1e-8 * n_B).
struct SamplingProbabilities {
    Vector pi;
    double nominal_size = 0.0;
};

/// Validates the invariants above; throws RateOutOfRange / ValidationError.
SamplingProbabilities make_probabilities(Vector pi, double nominal_size);

/// Poisson sampling: row e enters iff u_e <= pi_e with independent u_e.
/// Weights are IPW, w_e = rho / pi_e with rho = r / n_B. Exactly one uniform
/// is drawn per row, so the draw sequence depends only on n_B and the seed.
SubsampleSelection poisson_sample(const SamplingProbabilities& probs, RngStream& rng);

/// pi_e = r / n_B for every row.
SamplingProbabilities uniform_probabilities(Index n_external, double nominal_size);

/// Square roots of leverage scores: t_e = ||(X^T X)^{-1/2} x_e||_2, computed
/// row-wise from a Cholesky factor of the Gram (the explicit inverse is never
/// formed). sum(t^2) = d by the trace identity. OpenMP-parallel over rows.
Vector leverage_norms(const Matrix& X);

/// Serial reference for leverage_norms; identical output bit-for-bit.
Vector leverage_norms_serial(const Matrix& X);

/// Water-filling: given nonnegative scores s, returns the minimizer of
/// sum s_e^2 / pi_e subject to sum pi = r and 0 < pi_e <= 1, which is
/// pi_e = r (s_e ^ H) / sum_i (s_i ^ H). The cap H is located by the
/// order-statistic scan over g = number of saturated rows: with S_g the sum
/// of the n-g smallest scores, g is the integer with
/// s_(n-g) < S_g/(r-g) <= s_(n-g+1) (s_(n+1) = +inf), and H = S_g/(r-g).
Vector water_fill(const Vector& scores, double nominal_size);

/// Leverage-optimal probabilities: water-filled square-root leverage scores.
SamplingProbabilities optimal_probabilities(const Matrix& X_external, double nominal_size);

struct OsmacProbabilities {
    SamplingProbabilities probs;
    bool uniform_fallback = false;  // set when every pilot residual is zero
};

/// OSMAC-style mMSE probabilities: scores |y_e - x_e^T beta_pilot| * t_e,
/// water-filled with the same scan. Included as the baseline that chases
/// large residuals (and therefore outliers under contamination).
OsmacProbabilities osmac_probabilities(const Matrix& X_external, const Vector& y_external,
                                       const Vector& beta_pilot, double nominal_size);

/// Deterministic choice of the r external rows with the smallest
/// |y_e - x_e^T beta_target|; ties go to the lower original index.
/// All weights are 1.
SubsampleSelection target_guided_select(const RegressionDataset& external,
                                        const Vector& beta_target, Index r);

/// Union of a target-guided selection of size ceil(c * r_total) and a Poisson
/// draw from `probs` (which the caller must have built with nominal size
/// (1-c) * r_total). On an index collision the target-guided membership wins
/// and its weight 1 is kept.
SubsampleSelection combined_select(const RegressionDataset& external,
                                   const Vector& beta_target,
                                   const SamplingProbabilities& probs,
                                   Index r_total, double c, RngStream& rng);

}  // namespace subfuse
