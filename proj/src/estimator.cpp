#include "subfuse/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "subfuse/penalty.hpp"

namespace subfuse {

namespace {

Eigen::LLT<Matrix> fused_gram_factor(const FusedProblem& p) {
    Matrix V = p.target_X.transpose() * p.target_X;
    V.noalias() += p.sub_X.transpose() * p.weights.asDiagonal() * p.sub_X;
    Eigen::LLT<Matrix> llt(V);
    if (llt.info() != Eigen::Success) {
        throw SingularFusedGram("fused Gram matrix is not positive definite");
    }
    return llt;
}

}  // namespace

Vector fit_ols(const RegressionDataset& data) {
    validate_dataset(data);
    Eigen::ColPivHouseholderQR<Matrix> qr(data.X);
    if (qr.rank() < data.dim()) {
        throw SingularGram("design matrix is column-rank deficient");
    }
    return qr.solve(data.y);
}

Vector predict(const Vector& beta, const Matrix& X) {
    if (X.cols() != beta.size()) {
        throw DimensionMismatch("coefficient length does not match design columns");
    }
    return X * beta;
}

double fused_objective(const FusedProblem& p, const Vector& beta, const Vector& gamma) {
    const Vector rt = p.target_y - p.target_X * beta;
    const Vector rb = p.sub_y - p.sub_X * beta - gamma;
    double obj = rt.squaredNorm();
    for (Index e = 0; e < p.n_sub(); ++e) {
        obj += p.weights(e) * (rb(e) * rb(e) + p.penalty.lambda * penalty_value(gamma(e), p.penalty));
    }
    return obj;
}

double kkt_residual(const FusedProblem& p, const Vector& beta) {
    Vector score = p.target_X.transpose() * (p.target_y - p.target_X * beta);
    const Vector rb = p.sub_y - p.sub_X * beta;
    Vector wpsi(p.n_sub());
    for (Index e = 0; e < p.n_sub(); ++e) wpsi(e) = p.weights(e) * psi(rb(e), p.penalty);
    score.noalias() += p.sub_X.transpose() * wpsi;
    return score.lpNorm<Eigen::Infinity>();
}

Vector fit_pooled(const FusedProblem& p) {
    const auto llt = fused_gram_factor(p);
    const Vector rhs = p.target_X.transpose() * p.target_y +
                       p.sub_X.transpose() * p.weights.cwiseProduct(p.sub_y);
    return llt.solve(rhs);
}

FitResult fit_fused(const FusedProblem& p, const SolverSettings& settings) {
    if (!(settings.tol > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (settings.max_iter < 1) throw ValidationError("max_iter must be at least 1");
    const Index d = p.dim();
    const Index m = p.n_sub();

    const auto llt = fused_gram_factor(p);
    const Vector target_score = p.target_X.transpose() * p.target_y;

    Vector gamma;
    if (settings.gamma_init) {
        if (settings.gamma_init->size() != m) {
            throw DimensionMismatch("gamma_init length does not match selection");
        }
        gamma = *settings.gamma_init;
    } else {
        gamma = Vector::Zero(m);
    }

    FitResult fit;
    fit.penalty = p.penalty;
    fit.peak_aux_doubles = static_cast<std::size_t>(2 * d * d + 3 * d + 3 * m);

    Vector beta(d);
    Vector rhs(d);
    Vector residual(m);
    bool converged = false;
    int iterations = 0;
    for (int k = 1; k <= settings.max_iter; ++k) {
        iterations = k;
        rhs.noalias() = target_score + p.sub_X.transpose() * p.weights.cwiseProduct(p.sub_y - gamma);
        beta = llt.solve(rhs);
        if (settings.record_objective) {
            fit.objective_trace.push_back(fused_objective(p, beta, gamma));
        }
        residual.noalias() = p.sub_y - p.sub_X * beta;
        double diff = 0.0;
        for (Index e = 0; e < m; ++e) {
            const double g = theta(residual(e), p.penalty);
            diff = std::max(diff, std::abs(g - gamma(e)));
            gamma(e) = g;
        }
        if (diff < settings.tol) {
            converged = true;
            break;
        }
    }

    rhs.noalias() = target_score + p.sub_X.transpose() * p.weights.cwiseProduct(p.sub_y - gamma);
    beta = llt.solve(rhs);

    fit.beta = std::move(beta);
    fit.gamma = std::move(gamma);
    fit.iterations = iterations;
    fit.converged = converged;
    fit.kkt_residual = kkt_residual(p, fit.beta);
    if (settings.record_objective) {
        fit.peak_aux_doubles += fit.objective_trace.size();
    }
    return fit;
}

FitResult fit_fused_l2(const FusedProblem& p) {
    if (p.penalty.kind != PenaltyKind::L2) {
        throw ValidationError("closed-form solve requires the L2 penalty");
    }
    const double lambda = p.penalty.lambda;
    const double c = lambda / (1.0 + lambda);

    Matrix V = p.target_X.transpose() * p.target_X;
    V.noalias() += c * (p.sub_X.transpose() * p.weights.asDiagonal() * p.sub_X);
    Eigen::LLT<Matrix> llt(V);
    if (llt.info() != Eigen::Success) {
        throw SingularFusedGram("fused Gram matrix is not positive definite");
    }
    const Vector rhs = p.target_X.transpose() * p.target_y +
                       c * (p.sub_X.transpose() * p.weights.cwiseProduct(p.sub_y));

    FitResult fit;
    fit.penalty = p.penalty;
    fit.beta = llt.solve(rhs);
    fit.gamma = (p.sub_y - p.sub_X * fit.beta) / (1.0 + lambda);
    fit.iterations = 0;
    fit.converged = true;
    fit.kkt_residual = kkt_residual(p, fit.beta);
    fit.peak_aux_doubles = static_cast<std::size_t>(2 * p.dim() * p.dim() + 2 * p.dim());
    return fit;
}

Vector combine_estimators(const FitResult& fit_rs, const FitResult& fit_tg,
                          const Matrix& V_T, const Matrix& V_Brs, const Matrix& V_Btg) {
    const Index d = V_T.rows();
    if (V_T.cols() != d || V_Brs.rows() != d || V_Brs.cols() != d || V_Btg.rows() != d ||
        V_Btg.cols() != d || fit_rs.beta.size() != d || fit_tg.beta.size() != d) {
        throw DimensionMismatch("combiner inputs must all be d x d / length d");
    }
    const Matrix M = 2.0 * V_T + V_Brs + V_Btg;
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) {
        throw SingularCombiner("combined information matrix is not positive definite");
    }
    const Vector rhs = (V_T + V_Brs) * fit_rs.beta + (V_T + V_Btg) * fit_tg.beta;
    return llt.solve(rhs);
}

FitResult fit_data_combined(const RegressionDataset& target,
                            const RegressionDataset& external,
                            const SubsampleSelection& union_selection,
                            const PenaltySpec& penalty,
                            const SolverSettings& settings) {
    const FusedProblem problem = assemble_problem(target, external, union_selection, penalty);
    return fit_fused(problem, settings);
}

}  // namespace subfuse
