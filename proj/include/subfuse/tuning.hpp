#pragma once

#include <utility>
#include <vector>

#include "subfuse/dataset.hpp"
#include "subfuse/estimator.hpp"

namespace subfuse {

enum class Criterion { AIC, BIC };

/// Per-lambda tuning trace; chosen indices point at the criterion minimum
/// among converged fits (ties resolved toward larger lambda).
struct TuningReport {
    std::vector<double> grid;  // descending
    std::vector<double> df;
    std::vector<double> rss_target;
    std::vector<double> rss_external;
    std::vector<double> aic;
    std::vector<double> bic;
    std::vector<char> converged;
    int chosen_index_aic = -1;
    int chosen_index_bic = -1;
};

/// Log-spaced descending grid on [lambda_max / 1e4, lambda_max], where
/// lambda_max = max_e |y_e - x_e^T beta_pool| with beta_pool the pooled
/// weighted LS fit. At that anchor the L1 solve thresholds every shift to
/// zero from the zero start.
Vector lambda_grid(const FusedProblem& problem, int size);

/// (RSS_target, RSS_external): target residual sum of squares at beta, and
/// the squared residual norm of regressing (y_B - gamma) on X_B. The
/// projection is evaluated through a QR solve; no |B*| x |B*| projector is
/// formed.
std::pair<double, double> rss_components(const FusedProblem& problem, const FitResult& fit);

/// L1: #{|gamma_e| > 1e-10} + 1. L2: n_B*/(1+lambda) + lambda d/(1+lambda)
/// + sum_i q_i / (lambda + (1+lambda) q_i), with q_i the eigenvalues of
/// V_T^{1/2} V_B*^{-1} V_T^{1/2} obtained from the symmetric generalized
/// eigenproblem V_T u = q V_B* u (V_B* is the weighted subsample Gram).
double degrees_of_freedom(const FusedProblem& problem, const FitResult& fit);

/// AIC = m log(RSS/m) + 2 df, BIC = m log(RSS/m) + df (log m + 1),
/// RSS = rss_target + rss_external, m = n_S + n_B* - d.
std::pair<double, double> information_criteria(double rss_target, double rss_external,
                                               double df, Index n_target, Index n_sub,
                                               Index dim);

/// Fills fit.df / rss_* / aic / bic in place.
void annotate(const FusedProblem& problem, FitResult& fit);

/// Fits every lambda on the (descending) grid, warm-starting gamma from the
/// previous grid point, and returns the criterion-minimizing converged fit
/// plus the full trace. Throws NoConvergedFit if nothing converged.
std::pair<FitResult, TuningReport> select_lambda(const FusedProblem& problem,
                                                 const Vector& grid, Criterion criterion,
                                                 const SolverSettings& settings = {});

}  // namespace subfuse
