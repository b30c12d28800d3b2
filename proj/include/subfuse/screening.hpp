#pragma once

#include <vector>

#include "subfuse/dataset.hpp"

namespace subfuse {

struct ScreeningRow {
    int covariate = 0;  // 0-based column of the covariate matrix
    double t_stat = 0.0;
    double p_value = 1.0;
    bool selected = false;
    bool degenerate = false;  // zero-variance column: p forced to 1
};

struct ScreeningResult {
    std::vector<ScreeningRow> rows;
    double fdr_level = 0.1;
};

/// Marginal t-tests of y on (1, x_j) for every covariate column, two-sided
/// p-values from the t distribution with n-2 df, and Benjamini-Hochberg
/// step-up selection at level q.
ScreeningResult screen_covariates(const Matrix& covariates, const Vector& y, double q = 0.1);

}  // namespace subfuse
