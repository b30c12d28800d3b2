#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subfuse/dataset.hpp"
#include "subfuse/rng.hpp"
#include "subfuse/tuning.hpp"

namespace subfuse {

enum class CovariateTail { Normal, T3 };
enum class BiasCase { SP, HT, HL };
enum class CovStructure { AR1, Independent };

/// Synthetic-data scenario. Defaults reproduce the main simulation design:
/// n_S = 150 target rows, n_B = 20000 external rows, 100 AR(1)-correlated
/// covariates plus an explicit intercept column, unit intercept and all-ones
/// coefficients, N(0,1) noise. The gamma_* knobs parameterize the SP bias
/// distribution gamma ~ shift + Gamma(shape, scale) so that the independent
/// toy configuration (fraction 0.25, shift 0, Gamma(3,3), variance-4
/// covariates) is expressible as well.
struct ScenarioConfig {
    Index n_target = 150;
    Index n_external = 20000;
    Index d_covariates = 100;  // excluding the intercept column
    CovariateTail tail = CovariateTail::Normal;
    BiasCase bias_case = BiasCase::SP;
    CovStructure cov_structure = CovStructure::AR1;
    double cov_rho = 0.5;
    double cov_variance = 1.0;
    double sp_fraction = 0.7;
    double gamma_shift = 2.0;
    double gamma_shape = 1.0;
    double gamma_scale = 1.0;
    double intercept = 1.0;
    Vector coef;  // theta_0; empty means all ones of length d_covariates
    double noise_sd = 1.0;
    std::uint64_t master_seed = 1;

    Index dim() const { return d_covariates + 1; }
    Vector beta_true() const;
};

struct MetricsSummary {
    double emse = 0.0;
    double ebias2 = 0.0;
    double evar = 0.0;
};

/// Toeplitz AR(1) covariance, Sigma_ij = rho^|i-j|.
Matrix ar1_covariance(Index dim, double rho = 0.5);

/// n x (1 + d_covariates) design: all-ones column, then N(0, Sigma) or
/// multivariate t3 rows (z = g / sqrt(w/3), g ~ N(0, Sigma), w ~ chisq_3).
Matrix gen_covariates(Index n, const ScenarioConfig& config, RngStream& rng);

/// y = X beta_0 + eps.
RegressionDataset gen_target(const ScenarioConfig& config, RngStream& rng);

/// y = X beta_0 + gamma + eps with gamma per the configured bias case;
/// returns the realized gamma for diagnostics. The HL case computes leverage
/// on the realized design (intercept column included).
std::pair<RegressionDataset, Vector> gen_external(const ScenarioConfig& config, RngStream& rng);

/// Trimmed mean: sum of the order statistics v_(i), i from max(1, floor(aK))
/// to floor((1-a)K) (1-based, inclusive), divided by (1-2a)K. With a = 0 this
/// is the plain mean.
double trimmed_mean(std::vector<double> values, double alpha = 0.1);

/// eMSE = Trim(||b_k - b0||^2), eBias2 = ||mean(b) - b0||^2 (untrimmed mean),
/// eVar = Trim(||b_k - mean(b)||^2).
MetricsSummary evaluate_estimates(const std::vector<Vector>& estimates,
                                  const Vector& beta_true, double alpha = 0.1);

/// Trimmed mean over replications of the per-replication mean squared
/// prediction error on held-out data.
double emspe(const std::vector<Vector>& fits,
             const std::vector<RegressionDataset>& test_sets, double alpha = 0.1);

enum class EstimatorId {
    Target,            // target-only OLS
    Full,              // full-data fusion, w = 1
    Uniform,           // Poisson, uniform probabilities, IPW
    Leverage,          // Poisson, water-filled leverage probabilities, IPW
    TargetGuided,      // deterministic smallest-residual selection
    DataCombined,      // union of target-guided and leverage-Poisson rows
    EstimatorCombined, // weighted average of the two separate fits
    Osmac,             // Poisson, residual-times-leverage probabilities
};

const char* estimator_name(EstimatorId id);
EstimatorId estimator_from_name(const std::string& name);  // throws ValidationError

struct ExperimentConfig {
    ScenarioConfig scenario;
    int replications = 500;
    std::vector<double> rates{0.0075, 0.03, 0.12, 0.48};
    std::vector<EstimatorId> estimators{
        EstimatorId::Target,       EstimatorId::Full,         EstimatorId::Uniform,
        EstimatorId::Leverage,     EstimatorId::TargetGuided, EstimatorId::DataCombined,
        EstimatorId::EstimatorCombined};
    PenaltyKind penalty = PenaltyKind::L1;
    // BIC by default: the fused RSS can be driven down to the target-only RSS
    // by letting the shifts absorb the external residuals, and the AIC
    // penalty 2 df is too weak to resist that when n_B* >> n_S.
    Criterion criterion = Criterion::BIC;
    int grid_size = 20;
    double combined_fraction = 0.5;  // c: share of the combined budget that is target-guided
    double trim_alpha = 0.1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    SolverSettings solver;
    bool keep_losses = false;  // retain per-replication squared errors
};

struct ResultRow {
    EstimatorId estimator;
    double rate = 0.0;
    int k_effective = 0;
    MetricsSummary metrics;
    int failures = 0;
    // Mean over replications of the fraction of selected external rows whose
    // true shift is nonzero; NaN for the target-only estimator.
    double contaminated_fraction = 0.0;
    std::vector<double> losses;  // per successful replication, if kept
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  // estimator-major, then rate, config order
};

/// Runs the full replication study. Each replication k draws fresh data from
/// streams derived from (master_seed, k) and fits every configured estimator
/// at every rate; failed fits are recorded and excluded. With workers > 1 the
/// replication loop runs under OpenMP; results are folded in replication
/// order, so parallel and serial runs produce identical tables.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace subfuse
