#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "subfuse/errors.hpp"

namespace subfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Design matrix plus response. If the model has an intercept it is an
/// explicit all-ones column (by convention column 0), never an implicit flag.
struct RegressionDataset {
    Matrix X;
    Vector y;

    Index n() const { return X.rows(); }
    Index dim() const { return X.cols(); }
};

/// Throws DimensionMismatch or NonFiniteEntry (with the offending position)
/// when the dataset invariants do not hold.
void validate_dataset(const RegressionDataset& data);

/// A chosen subset of external rows together with their fusion weights.
/// For IPW selections w_e = rho / pi_e; for target-guided selections w_e = 1.
struct SubsampleSelection {
    std::vector<Index> indices;  // strictly increasing, within [0, n_B)
    Vector weights;              // > 0, finite, same length as indices
    double nominal_size = 0.0;   // r = rho * n_B
    double rate = 1.0;           // rho in (0, 1]

    Index size() const { return static_cast<Index>(indices.size()); }
};

enum class PenaltyKind { L1, L2 };

/// Mean-shift penalty: P(g) = 2 |g|^nu / nu with nu = 1 or 2, scaled by lambda.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::L1;
    double lambda = 1.0;
};

/// The fused estimation problem: target data plus the selected external rows.
/// The selected rows are gathered once at assembly (|B*| row copies, never a
/// copy of the full external table); everything here is immutable afterwards
/// and safe to share across threads.
struct FusedProblem {
    Matrix target_X;
    Vector target_y;
    Matrix sub_X;   // |B*| x d gather of the selected external rows
    Vector sub_y;
    Vector weights;
    std::vector<Index> indices;  // original external row ids, ascending
    PenaltySpec penalty;
    double rate = 1.0;
    double nominal_size = 0.0;

    Index dim() const { return target_X.cols(); }
    Index n_target() const { return target_X.rows(); }
    Index n_sub() const { return sub_X.rows(); }
};

/// Fitted coefficients and diagnostics. df / RSS / AIC / BIC start as NaN and
/// are filled in by tuning::annotate (or select_lambda) once the fit is scored.
struct FitResult {
    Vector beta;
    Vector gamma;  // one entry per selected row, in selection order
    int iterations = 0;
    bool converged = false;
    PenaltySpec penalty;
    double kkt_residual = 0.0;

    double df = std::numeric_limits<double>::quiet_NaN();
    double rss_target = std::numeric_limits<double>::quiet_NaN();
    double rss_external = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    double bic = std::numeric_limits<double>::quiet_NaN();

    // Solver instrumentation: peak auxiliary doubles allocated during the
    // fit, and the objective value after every gamma update when requested.
    std::size_t peak_aux_doubles = 0;
    std::vector<double> objective_trace;
};

/// Validates both datasets and the selection against each other, gathers the
/// selected rows, and returns the immutable fused problem.
FusedProblem assemble_problem(const RegressionDataset& target,
                              const RegressionDataset& external,
                              const SubsampleSelection& selection,
                              const PenaltySpec& penalty);

}  // namespace subfuse
