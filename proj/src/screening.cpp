#include "subfuse/screening.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

namespace subfuse {

ScreeningResult screen_covariates(const Matrix& covariates, const Vector& y, double q) {
    const Index n = covariates.rows();
    const Index p = covariates.cols();
    if (n != y.size()) throw DimensionMismatch("covariate rows and response length differ");
    if (n <= 2) throw ValidationError("marginal t-tests need more than two observations");
    if (p < 1) throw EmptyInput("no covariates to screen");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("FDR level must lie in (0, 1)");

    const double ym = y.mean();
    const double syy = (y.array() - ym).square().sum();
    const boost::math::students_t dist(static_cast<double>(n - 2));

    ScreeningResult result;
    result.fdr_level = q;
    result.rows.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) {
        ScreeningRow& row = result.rows[static_cast<std::size_t>(j)];
        row.covariate = static_cast<int>(j);
        const double xm = covariates.col(j).mean();
        const Eigen::ArrayXd xc = covariates.col(j).array() - xm;
        const double sxx = xc.square().sum();
        if (sxx <= 1e-20 * static_cast<double>(n) * (1.0 + xm * xm)) {
            row.degenerate = true;  // constant column
            row.t_stat = 0.0;
            row.p_value = 1.0;
            continue;
        }
        const double sxy = (xc * (y.array() - ym)).sum();
        const double slope = sxy / sxx;
        const double rss = std::max(syy - sxy * sxy / sxx, 0.0);
        const double sigma2 = rss / static_cast<double>(n - 2);
        if (sigma2 <= 0.0) {
            row.t_stat = slope >= 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
            row.p_value = 0.0;
            continue;
        }
        row.t_stat = slope / std::sqrt(sigma2 / sxx);
        row.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(row.t_stat)));
    }

    // Benjamini-Hochberg step-up at level q.
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return result.rows[static_cast<std::size_t>(a)].p_value <
               result.rows[static_cast<std::size_t>(b)].p_value;
    });
    double threshold = -1.0;
    for (Index k = p; k >= 1; --k) {
        const double pk = result.rows[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])].p_value;
        if (pk <= q * static_cast<double>(k) / static_cast<double>(p)) {
            threshold = pk;
            break;
        }
    }
    if (threshold >= 0.0) {
        for (auto& row : result.rows) {
            row.selected = !row.degenerate && row.p_value <= threshold;
        }
    }
    return result;
}

}  // namespace subfuse
