#include "subfuse/tuning.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>

namespace subfuse {

Vector lambda_grid(const FusedProblem& problem, int size) {
    if (size < 2) throw ValidationError("lambda grid needs at least two points");
    const Vector beta_pool = fit_pooled(problem);
    double lambda_max = (problem.sub_y - problem.sub_X * beta_pool).cwiseAbs().maxCoeff();
    if (!(lambda_max > 0.0)) lambda_max = 1e-8;  // interpolating pooled fit
    Vector grid(size);
    const double decades = 4.0;
    for (int i = 0; i < size; ++i) {
        grid(i) = lambda_max * std::pow(10.0, -decades * i / (size - 1));
    }
    return grid;
}

std::pair<double, double> rss_components(const FusedProblem& problem, const FitResult& fit) {
    if (fit.beta.size() != problem.dim() || fit.gamma.size() != problem.n_sub()) {
        throw DimensionMismatch("fit does not match the problem dimensions");
    }
    const double rss_target = (problem.target_y - problem.target_X * fit.beta).squaredNorm();
    // Residual of the projection onto col(X_B): one rank-revealing QR solve.
    const Vector v = problem.sub_y - fit.gamma;
    Eigen::ColPivHouseholderQR<Matrix> qr(problem.sub_X);
    const double rss_external = (v - problem.sub_X * qr.solve(v)).squaredNorm();
    return {rss_target, rss_external};
}

double degrees_of_freedom(const FusedProblem& problem, const FitResult& fit) {
    if (problem.penalty.kind == PenaltyKind::L1) {
        Index nonzero = 0;
        for (Index e = 0; e < fit.gamma.size(); ++e) {
            if (std::abs(fit.gamma(e)) > 1e-10) ++nonzero;
        }
        return static_cast<double>(nonzero) + 1.0;
    }
    const double lambda = problem.penalty.lambda;
    const Matrix V_T = problem.target_X.transpose() * problem.target_X;
    const Matrix V_B =
        problem.sub_X.transpose() * problem.weights.asDiagonal() * problem.sub_X;
    if (Eigen::LLT<Matrix>(V_B).info() != Eigen::Success) {
        throw SingularExternalGram("weighted external Gram is not positive definite");
    }
    // q_i solve V_T u = q V_B u; they equal the eigenvalues of
    // V_T^{1/2} V_B^{-1} V_T^{1/2} without forming any inverse.
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(V_T, V_B);
    if (eig.info() != Eigen::Success) {
        throw SingularExternalGram("generalized eigenproblem failed");
    }
    const double m = static_cast<double>(problem.n_sub());
    const double d = static_cast<double>(problem.dim());
    double df = m / (1.0 + lambda) + lambda * d / (1.0 + lambda);
    for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double q = eig.eigenvalues()(i);
        df += q / (lambda + (1.0 + lambda) * q);
    }
    return df;
}

std::pair<double, double> information_criteria(double rss_target, double rss_external,
                                               double df, Index n_target, Index n_sub,
                                               Index dim) {
    const double m = static_cast<double>(n_target + n_sub - dim);
    const double rss = rss_target + rss_external;
    if (!(m > 0.0)) throw DegenerateRSS("nonpositive effective sample size");
    if (!(rss > 0.0)) throw DegenerateRSS("nonpositive residual sum of squares");
    const double base = m * std::log(rss / m);
    return {base + 2.0 * df, base + df * (std::log(m) + 1.0)};
}

void annotate(const FusedProblem& problem, FitResult& fit) {
    const auto [rss_t, rss_e] = rss_components(problem, fit);
    fit.rss_target = rss_t;
    fit.rss_external = rss_e;
    fit.df = degrees_of_freedom(problem, fit);
    const auto [aic, bic] = information_criteria(rss_t, rss_e, fit.df, problem.n_target(),
                                                 problem.n_sub(), problem.dim());
    fit.aic = aic;
    fit.bic = bic;
}

std::pair<FitResult, TuningReport> select_lambda(const FusedProblem& problem,
                                                 const Vector& grid, Criterion criterion,
                                                 const SolverSettings& settings) {
    if (grid.size() == 0) throw EmptyInput("lambda grid is empty");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    FusedProblem work = problem;  // one copy; lambda is swapped per grid point
    SolverSettings step = settings;

    TuningReport report;
    FitResult best;
    double best_value = std::numeric_limits<double>::infinity();
    int best_index = -1;
    double best_aic = std::numeric_limits<double>::infinity();
    double best_bic = std::numeric_limits<double>::infinity();

    for (Index i = 0; i < grid.size(); ++i) {
        work.penalty.lambda = grid(i);
        double df = nan, rss_t = nan, rss_e = nan, aic = nan, bic = nan;
        bool converged = false;
        try {
            FitResult fit = fit_fused(work, step);
            step.gamma_init = fit.gamma;  // warm start for the next grid point
            converged = fit.converged;
            if (converged) {
                annotate(work, fit);
                df = fit.df;
                rss_t = fit.rss_target;
                rss_e = fit.rss_external;
                aic = fit.aic;
                bic = fit.bic;
                if (aic < best_aic) {
                    best_aic = aic;
                    report.chosen_index_aic = static_cast<int>(i);
                }
                if (bic < best_bic) {
                    best_bic = bic;
                    report.chosen_index_bic = static_cast<int>(i);
                }
                const double value = criterion == Criterion::AIC ? aic : bic;
                if (value < best_value) {  // strict: ties keep the larger lambda
                    best_value = value;
                    best = fit;
                    best_index = static_cast<int>(i);
                }
            }
        } catch (const NumericalError&) {
            // unscorable grid point; recorded as not converged
        }
        report.grid.push_back(grid(i));
        report.df.push_back(df);
        report.rss_target.push_back(rss_t);
        report.rss_external.push_back(rss_e);
        report.aic.push_back(aic);
        report.bic.push_back(bic);
        report.converged.push_back(converged ? 1 : 0);
    }

    if (best_index < 0) throw NoConvergedFit("no lambda on the grid produced a converged fit");
    return {std::move(best), std::move(report)};
}

}  // namespace subfuse
