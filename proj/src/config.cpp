#include "subfuse/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace subfuse {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "case",        "covariate_tail", "n_target",        "n_external",
    "d_covariates", "cov_structure",  "cov_rho",         "cov_variance",
    "sp_fraction", "gamma_shift",    "gamma_shape",     "gamma_scale",
    "intercept",   "coef_value",     "noise_sd",        "replications",
    "rates",       "estimators",     "penalty",         "criterion",
    "grid_size",   "combined_fraction", "trim_alpha",   "master_seed",
    "workers",     "tol",            "max_iter",        "output"};

template <typename T>
T get_or(const json& doc, const std::string& key, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigParseError("config key '" + key + "' has the wrong type");
    }
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ValidationError("config key '" + key + "' must be positive");
}

}  // namespace

LoadedConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigParseError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (!kKnownKeys.count(key)) throw ConfigParseError("unknown config key '" + key + "'");
    }

    LoadedConfig loaded;
    ExperimentConfig& cfg = loaded.experiment;
    ScenarioConfig& sc = cfg.scenario;

    const std::string bias = get_or<std::string>(doc, "case", "SP");
    if (bias == "SP") sc.bias_case = BiasCase::SP;
    else if (bias == "HT") sc.bias_case = BiasCase::HT;
    else if (bias == "HL") sc.bias_case = BiasCase::HL;
    else throw ValidationError("config key 'case' must be SP, HT, or HL");

    const std::string tail = get_or<std::string>(doc, "covariate_tail", "normal");
    if (tail == "normal") sc.tail = CovariateTail::Normal;
    else if (tail == "t3") sc.tail = CovariateTail::T3;
    else throw ValidationError("config key 'covariate_tail' must be normal or t3");

    const std::string cov = get_or<std::string>(doc, "cov_structure", "ar1");
    if (cov == "ar1") sc.cov_structure = CovStructure::AR1;
    else if (cov == "independent") sc.cov_structure = CovStructure::Independent;
    else throw ValidationError("config key 'cov_structure' must be ar1 or independent");

    sc.n_target = get_or<Index>(doc, "n_target", 150);
    sc.n_external = get_or<Index>(doc, "n_external", 20000);
    sc.d_covariates = get_or<Index>(doc, "d_covariates", 100);
    if (sc.n_target < 1 || sc.n_external < 1 || sc.d_covariates < 1) {
        throw ValidationError("sample sizes and d_covariates must be positive");
    }
    sc.cov_rho = get_or<double>(doc, "cov_rho", 0.5);
    if (!(std::abs(sc.cov_rho) < 1.0)) throw ValidationError("config key 'cov_rho' must be in (-1, 1)");
    sc.cov_variance = get_or<double>(doc, "cov_variance", 1.0);
    require_positive(sc.cov_variance, "cov_variance");
    sc.sp_fraction = get_or<double>(doc, "sp_fraction", 0.7);
    if (!(sc.sp_fraction >= 0.0 && sc.sp_fraction <= 1.0)) {
        throw ValidationError("config key 'sp_fraction' must be in [0, 1]");
    }
    sc.gamma_shift = get_or<double>(doc, "gamma_shift", 2.0);
    sc.gamma_shape = get_or<double>(doc, "gamma_shape", 1.0);
    require_positive(sc.gamma_shape, "gamma_shape");
    sc.gamma_scale = get_or<double>(doc, "gamma_scale", 1.0);
    require_positive(sc.gamma_scale, "gamma_scale");
    sc.intercept = get_or<double>(doc, "intercept", 1.0);
    if (doc.contains("coef_value")) {
        const double v = get_or<double>(doc, "coef_value", 1.0);
        sc.coef = Vector::Constant(sc.d_covariates, v);
    }
    sc.noise_sd = get_or<double>(doc, "noise_sd", 1.0);
    if (sc.noise_sd < 0.0) throw ValidationError("config key 'noise_sd' must be nonnegative");

    cfg.replications = get_or<int>(doc, "replications", 500);
    if (cfg.replications < 1) throw ValidationError("config key 'replications' must be positive");

    if (doc.contains("rates")) {
        cfg.rates = get_or<std::vector<double>>(doc, "rates", {});
        if (cfg.rates.empty()) throw ValidationError("config key 'rates' must be nonempty");
    }
    for (double rate : cfg.rates) {
        if (!(rate > 0.0 && rate <= 1.0)) {
            throw ValidationError("config key 'rates' entries must lie in (0, 1]");
        }
    }

    if (doc.contains("estimators")) {
        const auto names = get_or<std::vector<std::string>>(doc, "estimators", {});
        if (names.empty()) throw ValidationError("config key 'estimators' must be nonempty");
        cfg.estimators.clear();
        for (const auto& name : names) cfg.estimators.push_back(estimator_from_name(name));
    }

    const std::string penalty = get_or<std::string>(doc, "penalty", "l1");
    if (penalty == "l1") cfg.penalty = PenaltyKind::L1;
    else if (penalty == "l2") cfg.penalty = PenaltyKind::L2;
    else throw ValidationError("config key 'penalty' must be l1 or l2");

    const std::string criterion = get_or<std::string>(doc, "criterion", "bic");
    if (criterion == "aic") cfg.criterion = Criterion::AIC;
    else if (criterion == "bic") cfg.criterion = Criterion::BIC;
    else throw ValidationError("config key 'criterion' must be aic or bic");

    cfg.grid_size = get_or<int>(doc, "grid_size", 20);
    if (cfg.grid_size < 2) throw ValidationError("config key 'grid_size' must be at least 2");
    cfg.combined_fraction = get_or<double>(doc, "combined_fraction", 0.5);
    if (!(cfg.combined_fraction >= 0.0 && cfg.combined_fraction <= 1.0)) {
        throw ValidationError("config key 'combined_fraction' must be in [0, 1]");
    }
    cfg.trim_alpha = get_or<double>(doc, "trim_alpha", 0.1);
    if (!(cfg.trim_alpha >= 0.0 && cfg.trim_alpha < 0.5)) {
        throw ValidationError("config key 'trim_alpha' must be in [0, 0.5)");
    }
    cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 1);
    sc.master_seed = cfg.master_seed;
    cfg.workers = get_or<int>(doc, "workers", 1);
    if (cfg.workers < 1) throw ValidationError("config key 'workers' must be positive");
    cfg.solver.tol = get_or<double>(doc, "tol", 1e-8);
    require_positive(cfg.solver.tol, "tol");
    cfg.solver.max_iter = get_or<int>(doc, "max_iter", 1000);
    if (cfg.solver.max_iter < 1) throw ValidationError("config key 'max_iter' must be positive");

    loaded.output = get_or<std::string>(doc, "output", "results.csv");
    return loaded;
}

LoadedConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

}  // namespace subfuse
