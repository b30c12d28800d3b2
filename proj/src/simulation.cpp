#include "subfuse/simulation.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "subfuse/estimator.hpp"
#include "subfuse/sampling.hpp"

namespace subfuse {

Vector ScenarioConfig::beta_true() const {
    Vector beta(dim());
    beta(0) = intercept;
    if (coef.size() == 0) {
        beta.tail(d_covariates).setOnes();
    } else {
        if (coef.size() != d_covariates) {
            throw DimensionMismatch("coef length does not match d_covariates");
        }
        beta.tail(d_covariates) = coef;
    }
    return beta;
}

Matrix ar1_covariance(Index dim, double rho) {
    if (dim < 1) throw ValidationError("covariance dimension must be positive");
    Matrix sigma(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            sigma(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
        }
    }
    return sigma;
}

Matrix gen_covariates(Index n, const ScenarioConfig& config, RngStream& rng) {
    const Index d = config.d_covariates;
    Matrix chol_factor;
    if (config.cov_structure == CovStructure::AR1) {
        Eigen::LLT<Matrix> llt(ar1_covariance(d, config.cov_rho));
        if (llt.info() != Eigen::Success) {
            throw NumericalError("covariance matrix is not positive definite");
        }
        chol_factor = llt.matrixL();
    }
    const double sd = std::sqrt(config.cov_variance);

    Matrix X(n, d + 1);
    X.col(0).setOnes();
    Vector g(d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) g(j) = rng.normal();
        Vector z = config.cov_structure == CovStructure::AR1
                       ? Vector(chol_factor.triangularView<Eigen::Lower>() * g)
                       : g;
        z *= sd;
        if (config.tail == CovariateTail::T3) {
            const double w = rng.chi_squared(3.0);
            z /= std::sqrt(w / 3.0);
        }
        X.row(i).tail(d) = z;
    }
    return X;
}

RegressionDataset gen_target(const ScenarioConfig& config, RngStream& rng) {
    RegressionDataset data;
    data.X = gen_covariates(config.n_target, config, rng);
    data.y = data.X * config.beta_true();
    for (Index i = 0; i < config.n_target; ++i) data.y(i) += config.noise_sd * rng.normal();
    return data;
}

std::pair<RegressionDataset, Vector> gen_external(const ScenarioConfig& config, RngStream& rng) {
    const Index n = config.n_external;
    RegressionDataset data;
    data.X = gen_covariates(n, config, rng);

    Vector gamma = Vector::Zero(n);
    switch (config.bias_case) {
        case BiasCase::SP:
            for (Index e = 0; e < n; ++e) {
                if (rng.uniform() < config.sp_fraction) {
                    gamma(e) = config.gamma_shift +
                               rng.gamma(config.gamma_shape, config.gamma_scale);
                }
            }
            break;
        case BiasCase::HT:
            for (Index e = 0; e < n; ++e) gamma(e) = rng.abs_student_t(2.0);
            break;
        case BiasCase::HL: {
            // gamma_e = c xi_e h_e with h_e the leverage of the realized design
            // (intercept column included) and c = n_B / (d - 1).
            const Vector t = leverage_norms(data.X);
            const double c =
                static_cast<double>(n) / static_cast<double>(data.X.cols() - 1);
            for (Index e = 0; e < n; ++e) gamma(e) = c * rng.gamma(1.0, 1.0) * t(e) * t(e);
            break;
        }
    }

    data.y = data.X * config.beta_true() + gamma;
    for (Index e = 0; e < n; ++e) data.y(e) += config.noise_sd * rng.normal();
    return {std::move(data), std::move(gamma)};
}

double trimmed_mean(std::vector<double> values, double alpha) {
    const auto K = values.size();
    if (K == 0) throw EmptyInput("trimmed mean of an empty list");
    if (!(alpha >= 0.0 && alpha < 0.5)) throw ValidationError("trim proportion must be in [0, 0.5)");
    std::sort(values.begin(), values.end());
    // 1-based order-statistic window [floor(aK), floor((1-a)K)], lower bound
    // clamped to 1; the divisor stays (1-2a)K as printed even though the term
    // count can differ from it by one.
    std::size_t lo = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(K)));
    if (lo < 1) lo = 1;
    std::size_t hi = static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(K)));
    if (hi < lo) hi = lo;
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) sum += values[i - 1];
    return sum / ((1.0 - 2.0 * alpha) * static_cast<double>(K));
}

MetricsSummary evaluate_estimates(const std::vector<Vector>& estimates,
                                  const Vector& beta_true, double alpha) {
    if (estimates.empty()) throw EmptyInput("no estimates to evaluate");
    const Index d = beta_true.size();
    Vector mean = Vector::Zero(d);
    for (const Vector& b : estimates) {
        if (b.size() != d) throw DimensionMismatch("estimate length does not match beta_true");
        mean += b;
    }
    mean /= static_cast<double>(estimates.size());

    std::vector<double> sq_err, sq_dev;
    sq_err.reserve(estimates.size());
    sq_dev.reserve(estimates.size());
    for (const Vector& b : estimates) {
        sq_err.push_back((b - beta_true).squaredNorm());
        sq_dev.push_back((b - mean).squaredNorm());
    }
    MetricsSummary summary;
    summary.emse = trimmed_mean(std::move(sq_err), alpha);
    summary.ebias2 = (mean - beta_true).squaredNorm();
    summary.evar = trimmed_mean(std::move(sq_dev), alpha);
    return summary;
}

double emspe(const std::vector<Vector>& fits,
             const std::vector<RegressionDataset>& test_sets, double alpha) {
    if (fits.empty()) throw EmptyInput("no fits to evaluate");
    if (fits.size() != test_sets.size()) {
        throw DimensionMismatch("fits and test sets differ in length");
    }
    std::vector<double> mspe;
    mspe.reserve(fits.size());
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const RegressionDataset& test = test_sets[k];
        const Vector err = test.y - predict(fits[k], test.X);
        mspe.push_back(err.squaredNorm() / static_cast<double>(test.n()));
    }
    return trimmed_mean(std::move(mspe), alpha);
}

const char* estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::Target: return "target";
        case EstimatorId::Full: return "full";
        case EstimatorId::Uniform: return "uniform";
        case EstimatorId::Leverage: return "leverage";
        case EstimatorId::TargetGuided: return "tg";
        case EstimatorId::DataCombined: return "dc";
        case EstimatorId::EstimatorCombined: return "ec";
        case EstimatorId::Osmac: return "osmac";
    }
    return "?";
}

EstimatorId estimator_from_name(const std::string& name) {
    for (EstimatorId id :
         {EstimatorId::Target, EstimatorId::Full, EstimatorId::Uniform, EstimatorId::Leverage,
          EstimatorId::TargetGuided, EstimatorId::DataCombined, EstimatorId::EstimatorCombined,
          EstimatorId::Osmac}) {
        if (name == estimator_name(id)) return id;
    }
    throw ValidationError("unknown estimator identifier: " + name);
}

namespace {

constexpr std::uint64_t kTagTarget = 1;
constexpr std::uint64_t kTagExternal = 2;
constexpr std::uint64_t kTagSampling = 3;

struct CellResult {
    bool ok = false;
    Vector beta;
    double contaminated_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct Replication {
    std::vector<CellResult> cells;  // estimator-major, then rate
};

double contaminated_fraction(const std::vector<Index>& indices, const Vector& gamma_true) {
    if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
    Index hits = 0;
    for (Index e : indices) {
        if (gamma_true(e) != 0.0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(indices.size());
}

// Everything one replication needs; generated data plus lazily computed
// shared pieces (target OLS, external leverage norms, OSMAC scores).
class ReplicationContext {
public:
    ReplicationContext(const ExperimentConfig& cfg, int k)
        : cfg_(cfg),
          target_rng_(RngStream::child(cfg.master_seed, {kTagTarget, static_cast<std::uint64_t>(k)})),
          rep_(static_cast<std::uint64_t>(k)) {
        RngStream external_rng =
            RngStream::child(cfg.master_seed, {kTagExternal, static_cast<std::uint64_t>(k)});
        target_ = gen_target(cfg.scenario, target_rng_);
        std::tie(external_, gamma_true_) = gen_external(cfg.scenario, external_rng);
    }

    const RegressionDataset& target() const { return target_; }
    const RegressionDataset& external() const { return external_; }
    const Vector& gamma_true() const { return gamma_true_; }

    const Vector& target_ols() {
        if (target_ols_.size() == 0) target_ols_ = fit_ols(target_);
        return target_ols_;
    }

    const Vector& leverage() {
        if (leverage_.size() == 0) leverage_ = leverage_norms(external_.X);
        return leverage_;
    }

    const Vector& osmac_scores() {
        if (osmac_scores_.size() == 0) {
            const Vector resid = (external_.y - external_.X * target_ols()).cwiseAbs();
            osmac_scores_ = resid.cwiseProduct(leverage());
        }
        return osmac_scores_;
    }

    RngStream sampling_rng(EstimatorId id, double rate) const {
        return RngStream::child(cfg_.master_seed,
                                {kTagSampling, rep_, static_cast<std::uint64_t>(id),
                                 std::bit_cast<std::uint64_t>(rate)});
    }

private:
    const ExperimentConfig& cfg_;
    RngStream target_rng_;
    std::uint64_t rep_;
    RegressionDataset target_;
    RegressionDataset external_;
    Vector gamma_true_;
    Vector target_ols_;
    Vector leverage_;
    Vector osmac_scores_;
};

Vector tuned_fit(const ExperimentConfig& cfg, const RegressionDataset& target,
                 const RegressionDataset& external, const SubsampleSelection& sel) {
    const PenaltySpec penalty{cfg.penalty, 1.0};
    const FusedProblem problem = assemble_problem(target, external, sel, penalty);
    const Vector grid = lambda_grid(problem, cfg.grid_size);
    auto [fit, report] = select_lambda(problem, grid, cfg.criterion, cfg.solver);
    return fit.beta;
}

SubsampleSelection all_external_rows(Index n) {
    SubsampleSelection sel;
    sel.indices.resize(static_cast<std::size_t>(n));
    for (Index e = 0; e < n; ++e) sel.indices[static_cast<std::size_t>(e)] = e;
    sel.weights = Vector::Ones(n);
    sel.nominal_size = static_cast<double>(n);
    sel.rate = 1.0;
    return sel;
}

CellResult run_cell(const ExperimentConfig& cfg, ReplicationContext& ctx, EstimatorId id,
                    double rate) {
    const Index n_ext = ctx.external().n();
    const double r = rate * static_cast<double>(n_ext);
    const double c = cfg.combined_fraction;
    CellResult cell;
    switch (id) {
        case EstimatorId::Target: {
            cell.beta = ctx.target_ols();
            break;
        }
        case EstimatorId::Full: {
            const SubsampleSelection sel = all_external_rows(n_ext);
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::Uniform: {
            RngStream rng = ctx.sampling_rng(id, rate);
            const auto probs = uniform_probabilities(n_ext, r);
            const SubsampleSelection sel = poisson_sample(probs, rng);
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::Leverage: {
            RngStream rng = ctx.sampling_rng(id, rate);
            const auto probs = make_probabilities(water_fill(ctx.leverage(), r), r);
            const SubsampleSelection sel = poisson_sample(probs, rng);
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::Osmac: {
            RngStream rng = ctx.sampling_rng(id, rate);
            const auto probs = make_probabilities(water_fill(ctx.osmac_scores(), r), r);
            const SubsampleSelection sel = poisson_sample(probs, rng);
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::TargetGuided: {
            const Index r_count = std::clamp<Index>(static_cast<Index>(std::llround(r)),
                                                    Index{1}, n_ext);
            const SubsampleSelection sel =
                target_guided_select(ctx.external(), ctx.target_ols(), r_count);
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::DataCombined: {
            RngStream rng = ctx.sampling_rng(id, rate);
            const Index r_total = std::clamp<Index>(static_cast<Index>(std::llround(r)),
                                                    Index{1}, n_ext);
            const double r_random = (1.0 - c) * static_cast<double>(r_total);
            SubsampleSelection sel;
            if (c >= 1.0 || r_random <= 0.0) {
                sel = target_guided_select(ctx.external(), ctx.target_ols(), r_total);
            } else {
                const auto probs =
                    make_probabilities(water_fill(ctx.leverage(), r_random), r_random);
                sel = combined_select(ctx.external(), ctx.target_ols(), probs, r_total, c, rng);
            }
            cell.beta = tuned_fit(cfg, ctx.target(), ctx.external(), sel);
            cell.contaminated_fraction = contaminated_fraction(sel.indices, ctx.gamma_true());
            break;
        }
        case EstimatorId::EstimatorCombined: {
            RngStream rng = ctx.sampling_rng(id, rate);
            const Index r_total = std::clamp<Index>(static_cast<Index>(std::llround(r)),
                                                    Index{1}, n_ext);
            const Index r_tg = std::clamp<Index>(
                static_cast<Index>(std::ceil(c * static_cast<double>(r_total))), Index{1}, n_ext);
            const double r_random =
                std::max((1.0 - c) * static_cast<double>(r_total), 1.0);

            const auto probs =
                make_probabilities(water_fill(ctx.leverage(), r_random), r_random);
            const SubsampleSelection sel_rs = poisson_sample(probs, rng);
            const SubsampleSelection sel_tg =
                target_guided_select(ctx.external(), ctx.target_ols(), r_tg);

            const PenaltySpec penalty{cfg.penalty, 1.0};
            const FusedProblem prob_rs =
                assemble_problem(ctx.target(), ctx.external(), sel_rs, penalty);
            const FusedProblem prob_tg =
                assemble_problem(ctx.target(), ctx.external(), sel_tg, penalty);
            auto [fit_rs, rep_rs] = select_lambda(prob_rs, lambda_grid(prob_rs, cfg.grid_size),
                                                  cfg.criterion, cfg.solver);
            auto [fit_tg, rep_tg] = select_lambda(prob_tg, lambda_grid(prob_tg, cfg.grid_size),
                                                  cfg.criterion, cfg.solver);

            const Matrix V_T = ctx.target().X.transpose() * ctx.target().X;
            const Matrix V_Brs =
                prob_rs.sub_X.transpose() * prob_rs.weights.asDiagonal() * prob_rs.sub_X;
            const Matrix V_Btg = prob_tg.sub_X.transpose() * prob_tg.sub_X;
            cell.beta = combine_estimators(fit_rs, fit_tg, V_T, V_Brs, V_Btg);

            const double f_rs = contaminated_fraction(sel_rs.indices, ctx.gamma_true());
            const double f_tg = contaminated_fraction(sel_tg.indices, ctx.gamma_true());
            const double n_rs = static_cast<double>(sel_rs.indices.size());
            const double n_tg = static_cast<double>(sel_tg.indices.size());
            cell.contaminated_fraction =
                n_rs + n_tg > 0 ? (f_rs * n_rs + f_tg * n_tg) / (n_rs + n_tg)
                                : std::numeric_limits<double>::quiet_NaN();
            break;
        }
    }
    cell.ok = true;
    return cell;
}

Replication run_replication(const ExperimentConfig& cfg, int k) {
    Replication rep;
    rep.cells.resize(cfg.estimators.size() * cfg.rates.size());
    ReplicationContext ctx(cfg, k);
    std::size_t cell_index = 0;
    for (EstimatorId id : cfg.estimators) {
        for (double rate : cfg.rates) {
            try {
                rep.cells[cell_index] = run_cell(cfg, ctx, id, rate);
            } catch (const Error&) {
                rep.cells[cell_index] = CellResult{};
            }
            ++cell_index;
        }
    }
    return rep;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.replications < 1) throw ValidationError("need at least one replication");
    for (double rate : cfg.rates) {
        if (!(rate > 0.0 && rate <= 1.0)) throw RateOutOfRange("rates must lie in (0, 1]");
    }
    if (!(cfg.combined_fraction >= 0.0 && cfg.combined_fraction <= 1.0)) {
        throw RateOutOfRange("combined_fraction must lie in [0, 1]");
    }
    if (cfg.estimators.empty()) throw ValidationError("no estimators configured");

    const int K = cfg.replications;
    std::vector<Replication> slots(static_cast<std::size_t>(K));
    if (cfg.workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
        for (int k = 0; k < K; ++k) {
            slots[static_cast<std::size_t>(k)] = run_replication(cfg, k);
        }
    } else {
        for (int k = 0; k < K; ++k) {
            slots[static_cast<std::size_t>(k)] = run_replication(cfg, k);
        }
    }

    // Deterministic fold in replication order, independent of scheduling.
    const Vector beta_true = cfg.scenario.beta_true();
    ExperimentResult result;
    std::size_t cell_index = 0;
    for (EstimatorId id : cfg.estimators) {
        for (double rate : cfg.rates) {
            ResultRow row;
            row.estimator = id;
            row.rate = rate;
            std::vector<Vector> betas;
            double contam_sum = 0.0;
            int contam_count = 0;
            for (int k = 0; k < K; ++k) {
                const CellResult& cell = slots[static_cast<std::size_t>(k)].cells[cell_index];
                if (!cell.ok) continue;
                betas.push_back(cell.beta);
                if (std::isfinite(cell.contaminated_fraction)) {
                    contam_sum += cell.contaminated_fraction;
                    ++contam_count;
                }
            }
            row.k_effective = static_cast<int>(betas.size());
            row.failures = K - row.k_effective;
            if (betas.empty()) throw NoConvergedFit(std::string("estimator ") +
                                                    estimator_name(id) +
                                                    " failed in every replication");
            row.metrics = evaluate_estimates(betas, beta_true, cfg.trim_alpha);
            row.contaminated_fraction =
                contam_count > 0 ? contam_sum / contam_count
                                 : std::numeric_limits<double>::quiet_NaN();
            if (cfg.keep_losses) {
                row.losses.reserve(betas.size());
                for (const Vector& b : betas) row.losses.push_back((b - beta_true).squaredNorm());
            }
            result.rows.push_back(std::move(row));
            ++cell_index;
        }
    }
    return result;
}

}  // namespace subfuse
