#include "subfuse/dataset.hpp"

#include <cmath>
#include <sstream>

namespace subfuse {

void validate_dataset(const RegressionDataset& data) {
    if (data.X.rows() < 1 || data.X.cols() < 1) {
        throw DimensionMismatch("dataset must have at least one row and one column");
    }
    if (data.X.rows() != data.y.size()) {
        std::ostringstream msg;
        msg << "X has " << data.X.rows() << " rows but y has length " << data.y.size();
        throw DimensionMismatch(msg.str());
    }
    for (Index j = 0; j < data.X.cols(); ++j) {
        for (Index i = 0; i < data.X.rows(); ++i) {
            if (!std::isfinite(data.X(i, j))) {
                std::ostringstream msg;
                msg << "non-finite entry in X at row " << i << ", column " << j;
                throw NonFiniteEntry(msg.str());
            }
        }
    }
    for (Index i = 0; i < data.y.size(); ++i) {
        if (!std::isfinite(data.y(i))) {
            std::ostringstream msg;
            msg << "non-finite entry in y at row " << i;
            throw NonFiniteEntry(msg.str());
        }
    }
}

FusedProblem assemble_problem(const RegressionDataset& target,
                              const RegressionDataset& external,
                              const SubsampleSelection& selection,
                              const PenaltySpec& penalty) {
    validate_dataset(target);
    validate_dataset(external);
    if (target.dim() != external.dim()) {
        std::ostringstream msg;
        msg << "target has " << target.dim() << " columns, external has " << external.dim();
        throw ColumnCountMismatch(msg.str());
    }
    const Index m = selection.size();
    if (m == 0) throw EmptyInput("selection is empty");
    if (selection.weights.size() != m) {
        throw DimensionMismatch("selection weights and indices differ in length");
    }
    for (Index k = 0; k < m; ++k) {
        const Index e = selection.indices[static_cast<std::size_t>(k)];
        if (e < 0 || e >= external.n()) {
            std::ostringstream msg;
            msg << "selected index " << e << " outside external data of size " << external.n();
            throw IndexOutOfRange(msg.str());
        }
        if (k > 0 && selection.indices[static_cast<std::size_t>(k - 1)] >= e) {
            throw ValidationError("selection indices must be strictly increasing");
        }
        const double w = selection.weights(k);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ValidationError("selection weights must be positive and finite");
        }
    }
    if (target.n() + m <= target.dim()) {
        std::ostringstream msg;
        msg << "fused problem underdetermined: " << target.n() << " target + " << m
            << " external rows for " << target.dim() << " coefficients";
        throw UnderdeterminedProblem(msg.str());
    }
    if (!(penalty.lambda >= 0.0) || !std::isfinite(penalty.lambda)) {
        throw ValidationError("penalty lambda must be finite and nonnegative");
    }

    FusedProblem problem;
    problem.target_X = target.X;
    problem.target_y = target.y;
    problem.sub_X.resize(m, external.dim());
    problem.sub_y.resize(m);
    for (Index k = 0; k < m; ++k) {
        const Index e = selection.indices[static_cast<std::size_t>(k)];
        problem.sub_X.row(k) = external.X.row(e);
        problem.sub_y(k) = external.y(e);
    }
    problem.weights = selection.weights;
    problem.indices = selection.indices;
    problem.penalty = penalty;
    problem.rate = selection.rate;
    problem.nominal_size = selection.nominal_size;
    return problem;
}

}  // namespace subfuse
