#include "subfuse/sampling.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace subfuse {

SamplingProbabilities make_probabilities(Vector pi, double nominal_size) {
    const Index n = pi.size();
    if (n == 0) throw EmptyInput("no sampling probabilities");
    if (!(nominal_size > 0.0) || nominal_size > static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "nominal size " << nominal_size << " outside (0, " << n << "]";
        throw RateOutOfRange(msg.str());
    }
    double sum = 0.0;
    for (Index e = 0; e < n; ++e) {
        // Water-filled caps can land at 1 + O(eps); snap those back.
        if (pi(e) > 1.0 && pi(e) < 1.0 + 1e-12) pi(e) = 1.0;
        if (!(pi(e) > 0.0) || pi(e) > 1.0 || !std::isfinite(pi(e))) {
            std::ostringstream msg;
            msg << "probability " << pi(e) << " at row " << e << " outside (0, 1]";
            throw ValidationError(msg.str());
        }
        sum += pi(e);
    }
    if (std::abs(sum - nominal_size) > 1e-8 * static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "probabilities sum to " << sum << ", expected " << nominal_size;
        throw ValidationError(msg.str());
    }
    return SamplingProbabilities{std::move(pi), nominal_size};
}

SubsampleSelection poisson_sample(const SamplingProbabilities& probs, RngStream& rng) {
    const Index n = probs.pi.size();
    const double rho = probs.nominal_size / static_cast<double>(n);
    SubsampleSelection sel;
    sel.nominal_size = probs.nominal_size;
    sel.rate = rho;
    std::vector<double> weights;
    for (Index e = 0; e < n; ++e) {
        const double u = rng.uniform();
        if (u <= probs.pi(e)) {
            sel.indices.push_back(e);
            weights.push_back(rho / probs.pi(e));
        }
    }
    sel.weights = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
    return sel;
}

SamplingProbabilities uniform_probabilities(Index n_external, double nominal_size) {
    if (n_external < 1) throw EmptyInput("external data is empty");
    if (!(nominal_size > 0.0) || nominal_size > static_cast<double>(n_external)) {
        std::ostringstream msg;
        msg << "nominal size " << nominal_size << " outside (0, " << n_external << "]";
        throw RateOutOfRange(msg.str());
    }
    Vector pi = Vector::Constant(n_external, nominal_size / static_cast<double>(n_external));
    return SamplingProbabilities{std::move(pi), nominal_size};
}

namespace {

Eigen::LLT<Matrix> gram_factor(const Matrix& X) {
    const Matrix gram = X.transpose() * X;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw SingularGram("X^T X is not positive definite");
    }
    return llt;
}

inline double row_leverage_norm(const Eigen::LLT<Matrix>& llt, const Matrix& X, Index e) {
    // t_e = ||L^{-1} x_e||_2 via one triangular solve.
    Vector v = X.row(e).transpose();
    llt.matrixL().solveInPlace(v);
    return v.norm();
}

}  // namespace

Vector leverage_norms_serial(const Matrix& X) {
    const auto llt = gram_factor(X);
    Vector t(X.rows());
    for (Index e = 0; e < X.rows(); ++e) t(e) = row_leverage_norm(llt, X, e);
    return t;
}

Vector leverage_norms(const Matrix& X) {
    const auto llt = gram_factor(X);
    Vector t(X.rows());
    const Index n = X.rows();
#pragma omp parallel for schedule(static)
    for (Index e = 0; e < n; ++e) t(e) = row_leverage_norm(llt, X, e);
    return t;
}

Vector water_fill(const Vector& scores, double nominal_size) {
    const Index n = scores.size();
    const double r = nominal_size;
    if (n == 0) throw EmptyInput("no scores");
    if (!(r > 0.0) || r > static_cast<double>(n)) {
        std::ostringstream msg;
        msg << "nominal size " << r << " outside (0, " << n << "]";
        throw RateOutOfRange(msg.str());
    }
    for (Index e = 0; e < n; ++e) {
        if (!(scores(e) >= 0.0) || !std::isfinite(scores(e))) {
            throw ValidationError("water-fill scores must be nonnegative and finite");
        }
    }
    if (r == static_cast<double>(n)) return Vector::Ones(n);

    // Guard exact zeros: a zero score would produce pi = 0, which breaks the
    // positivity invariant and makes the IPW weight undefined. Floor at a
    // relative epsilon instead; rows this small are effectively never drawn.
    Vector s = scores;
    const double top = s.maxCoeff();
    if (top <= 0.0) throw ValidationError("all water-fill scores are zero");
    const double floor_value = top * 1e-12;
    for (Index e = 0; e < n; ++e) s(e) = std::max(s(e), floor_value);

    std::vector<double> sorted(s.data(), s.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (Index i = 0; i < n; ++i) {
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + sorted[static_cast<std::size_t>(i)];
    }

    // Scan for the number of capped rows g: with S_g the sum of the n-g
    // smallest scores, the threshold H = S_g / (r - g) must fall between the
    // order statistics s_(n-g) and s_(n-g+1) (the latter +inf at g = 0 ... n).
    const int g_max = static_cast<int>(std::min<double>(static_cast<double>(n) - 1.0,
                                                        std::ceil(r) - 1.0));
    double cap = std::numeric_limits<double>::infinity();
    for (int g = 0; g <= g_max; ++g) {
        const double sum_low = prefix[static_cast<std::size_t>(n - g)];
        const double h = sum_low / (r - static_cast<double>(g));
        const double below = sorted[static_cast<std::size_t>(n - g - 1)];
        const double above = (g == 0) ? std::numeric_limits<double>::infinity()
                                      : sorted[static_cast<std::size_t>(n - g)];
        if (below < h && h <= above) {
            cap = h;
            break;
        }
    }
    if (!std::isfinite(cap)) {
        // Fully saturated ties can defeat the strict scan; fall back to the
        // equivalent fixed point sum(min(s, H)) = r H / r ... solved by bisection.
        double lo = 0.0, hi = top;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double total = 0.0;
            for (Index e = 0; e < n; ++e) total += std::min(s(e), mid);
            (total < r * mid ? hi : lo) = mid;
        }
        cap = 0.5 * (lo + hi);
    }

    double denom = 0.0;
    for (Index e = 0; e < n; ++e) denom += std::min(s(e), cap);
    Vector pi(n);
    for (Index e = 0; e < n; ++e) pi(e) = std::min(r * std::min(s(e), cap) / denom, 1.0);
    return pi;
}

SamplingProbabilities optimal_probabilities(const Matrix& X_external, double nominal_size) {
    const Vector t = leverage_norms(X_external);
    return make_probabilities(water_fill(t, nominal_size), nominal_size);
}

OsmacProbabilities osmac_probabilities(const Matrix& X_external, const Vector& y_external,
                                       const Vector& beta_pilot, double nominal_size) {
    if (X_external.rows() != y_external.size()) {
        throw DimensionMismatch("external X and y differ in length");
    }
    if (X_external.cols() != beta_pilot.size()) {
        throw DimensionMismatch("pilot coefficient length does not match columns");
    }
    const Vector t = leverage_norms(X_external);
    const Vector resid = (y_external - X_external * beta_pilot).cwiseAbs();
    OsmacProbabilities out;
    if (resid.maxCoeff() == 0.0) {
        out.probs = uniform_probabilities(X_external.rows(), nominal_size);
        out.uniform_fallback = true;
        return out;
    }
    const Vector scores = resid.cwiseProduct(t);
    out.probs = make_probabilities(water_fill(scores, nominal_size), nominal_size);
    return out;
}

SubsampleSelection target_guided_select(const RegressionDataset& external,
                                        const Vector& beta_target, Index r) {
    validate_dataset(external);
    if (external.dim() != beta_target.size()) {
        throw DimensionMismatch("coefficient length does not match external columns");
    }
    const Index n = external.n();
    if (r < 1 || r > n) {
        std::ostringstream msg;
        msg << "selection size " << r << " outside [1, " << n << "]";
        throw RateOutOfRange(msg.str());
    }
    const Vector resid = (external.y - external.X * beta_target).cwiseAbs();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    // Ties go to the lower original index (lexicographic key).
    std::nth_element(order.begin(), order.begin() + (r - 1), order.end(),
                     [&](Index a, Index b) {
                         return resid(a) < resid(b) || (resid(a) == resid(b) && a < b);
                     });
    SubsampleSelection sel;
    sel.indices.assign(order.begin(), order.begin() + r);
    std::sort(sel.indices.begin(), sel.indices.end());
    sel.weights = Vector::Ones(r);
    sel.nominal_size = static_cast<double>(r);
    sel.rate = static_cast<double>(r) / static_cast<double>(n);
    return sel;
}

SubsampleSelection combined_select(const RegressionDataset& external,
                                   const Vector& beta_target,
                                   const SamplingProbabilities& probs,
                                   Index r_total, double c, RngStream& rng) {
    if (!(c >= 0.0 && c <= 1.0)) throw RateOutOfRange("combined fraction must be in [0, 1]");
    if (r_total < 1 || r_total > external.n()) {
        throw RateOutOfRange("combined selection size outside [1, n_B]");
    }
    const Index r_tg = static_cast<Index>(std::ceil(c * static_cast<double>(r_total)));

    if (c >= 1.0) return target_guided_select(external, beta_target, r_tg);
    const SubsampleSelection random_part = poisson_sample(probs, rng);
    if (r_tg == 0) return random_part;

    const SubsampleSelection guided_part = target_guided_select(external, beta_target, r_tg);

    // Merge the two ascending index lists; guided membership wins collisions.
    SubsampleSelection out;
    out.nominal_size = static_cast<double>(r_tg) + probs.nominal_size;
    out.rate = out.nominal_size / static_cast<double>(external.n());
    std::vector<double> weights;
    std::size_t a = 0, b = 0;
    while (a < guided_part.indices.size() || b < random_part.indices.size()) {
        const bool take_guided =
            b == random_part.indices.size() ||
            (a < guided_part.indices.size() &&
             guided_part.indices[a] <= random_part.indices[b]);
        if (take_guided) {
            if (b < random_part.indices.size() &&
                guided_part.indices[a] == random_part.indices[b]) {
                ++b;  // collision: keep the guided row with weight 1
            }
            out.indices.push_back(guided_part.indices[a]);
            weights.push_back(1.0);
            ++a;
        } else {
            out.indices.push_back(random_part.indices[b]);
            weights.push_back(random_part.weights(static_cast<Index>(b)));
            ++b;
        }
    }
    out.weights = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
    return out;
}

}  // namespace subfuse
