#pragma once

#include <optional>

#include "subfuse/dataset.hpp"

namespace subfuse {

struct SolverSettings {
    double tol = 1e-8;   // infinity-norm threshold on successive gamma iterates
    int max_iter = 1000;
    std::optional<Vector> gamma_init;  // defaults to zeros
    bool record_objective = false;     // fill FitResult::objective_trace
};

/// Ordinary least squares on one dataset. Throws SingularGram when the design
/// is column-rank deficient.
Vector fit_ols(const RegressionDataset& data);

/// Solves the fused mean-shift problem
///   min_{beta,gamma} ||y_T - X_T beta||^2 + sum_e w_e (y_e - x_e^T beta - gamma_e)^2
///                    + lambda sum_e w_e P(gamma_e)
/// by the fixed-point iteration: beta <- V^{-1}(X_T^T y_T + X_B^T W (y_B - gamma)),
/// gamma_e <- theta(y_e - x_e^T beta), with V = X_T^T X_T + X_B^T W X_B
/// factorized once. The |B*| x |B*| hat matrix is never materialized; every
/// product goes through the cached Cholesky factor of V, so auxiliary storage
/// stays O(|B*| d + d^2). Convergence is declared on
/// ||gamma^(k+1) - gamma^(k)||_inf < tol; beta is recomputed once at the end.
FitResult fit_fused(const FusedProblem& problem, const SolverSettings& settings = {});

/// One-shot L2 solve: beta = (V_T + c V_B^w)^{-1} (X_T^T y_T + c X_B^T W y_B)
/// with c = lambda / (1 + lambda), then gamma = (y_B - X_B beta) / (1 + lambda).
FitResult fit_fused_l2(const FusedProblem& problem);

/// Estimator combining:
///   beta = (2 V_T + V_Brs + V_Btg)^{-1} {(V_T + V_Brs) beta_rs + (V_T + V_Btg) beta_tg}.
Vector combine_estimators(const FitResult& fit_rs, const FitResult& fit_tg,
                          const Matrix& V_T, const Matrix& V_Brs, const Matrix& V_Btg);

/// Data combining: fit_fused on the assembled union problem.
FitResult fit_data_combined(const RegressionDataset& target,
                            const RegressionDataset& external,
                            const SubsampleSelection& union_selection,
                            const PenaltySpec& penalty,
                            const SolverSettings& settings = {});

/// yhat = X beta.
Vector predict(const Vector& beta, const Matrix& X);

/// The objective of the fused problem at (beta, gamma); used for the
/// monotonicity diagnostics and by tests.
double fused_objective(const FusedProblem& problem, const Vector& beta, const Vector& gamma);

/// KKT residual ||X_T^T(y_T - X_T beta) + X_B^T W psi(y_B - X_B beta)||_inf.
/// Zero (up to tolerance) exactly at the minimizer of the fused problem.
double kkt_residual(const FusedProblem& problem, const Vector& beta);

/// Pooled weighted least squares (the gamma = 0 fit); used as the lambda-grid
/// anchor and by the degenerate-lambda paths.
Vector fit_pooled(const FusedProblem& problem);

}  // namespace subfuse
