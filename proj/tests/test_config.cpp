#include <doctest.h>

#include "subfuse/config.hpp"

using namespace subfuse;

TEST_CASE("empty config yields the standard study defaults") {
    const auto loaded = parse_experiment_config("{}");
    const auto& cfg = loaded.experiment;
    CHECK(cfg.scenario.n_target == 150);
    CHECK(cfg.scenario.n_external == 20000);
    CHECK(cfg.scenario.d_covariates == 100);
    CHECK(cfg.replications == 500);
    CHECK(cfg.trim_alpha == 0.1);
    REQUIRE(cfg.rates.size() == 4);
    CHECK(cfg.rates[0] == 0.0075);
    CHECK(cfg.rates[3] == 0.48);
    CHECK(cfg.penalty == PenaltyKind::L1);
    CHECK(loaded.output == "results.csv");
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_experiment_config(R"({"n_tragte": 10})");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(std::string(e.what()).find("n_tragte") != std::string::npos);
    }
}

TEST_CASE("invalid JSON is a parse error") {
    CHECK_THROWS_AS(parse_experiment_config("{"), ConfigParseError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"n_target": "many"})"), ConfigParseError);
}

TEST_CASE("domain violations are validation errors") {
    CHECK_THROWS_AS(parse_experiment_config(R"({"rates": [1.5]})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"rates": []})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"case": "XX"})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"estimators": ["nope"]})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"trim_alpha": 0.5})"), ValidationError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"grid_size": 1})"), ValidationError);
}

TEST_CASE("a full config round-trips into the experiment") {
    const auto loaded = parse_experiment_config(R"({
        "case": "HT", "covariate_tail": "t3", "n_target": 30, "n_external": 500,
        "d_covariates": 5, "cov_structure": "independent", "cov_variance": 4.0,
        "replications": 12, "rates": [0.1, 0.4], "estimators": ["target", "tg", "ec"],
        "penalty": "l2", "criterion": "bic", "grid_size": 7, "combined_fraction": 0.3,
        "trim_alpha": 0.0, "master_seed": 99, "workers": 2, "tol": 1e-6,
        "max_iter": 200, "output": "out.csv", "coef_value": 2.5
    })");
    const auto& cfg = loaded.experiment;
    CHECK(cfg.scenario.bias_case == BiasCase::HT);
    CHECK(cfg.scenario.tail == CovariateTail::T3);
    CHECK(cfg.scenario.cov_structure == CovStructure::Independent);
    CHECK(cfg.scenario.cov_variance == 4.0);
    CHECK(cfg.scenario.coef.size() == 5);
    CHECK(cfg.scenario.coef(0) == 2.5);
    REQUIRE(cfg.estimators.size() == 3);
    CHECK(cfg.estimators[1] == EstimatorId::TargetGuided);
    CHECK(cfg.penalty == PenaltyKind::L2);
    CHECK(cfg.criterion == Criterion::BIC);
    CHECK(cfg.solver.max_iter == 200);
    CHECK(loaded.output == "out.csv");
}
