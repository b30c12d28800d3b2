#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "subfuse/estimator.hpp"
#include "subfuse/penalty.hpp"
#include "subfuse/sampling.hpp"

using namespace subfuse;

TEST_CASE("fit_ols interpolates noiseless data") {
    RngStream rng(30);
    Matrix X = Matrix::NullaryExpr(12, 3, [&]() { return rng.normal(); });
    Vector beta(3);
    beta << 2.0, -1.0, 0.5;
    const RegressionDataset data{X, X * beta};
    CHECK((fit_ols(data) - beta).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("fit_ols on an intercept-only design returns the mean") {
    Vector y(4);
    y << 1, 2, 3, 10;
    const RegressionDataset data{Matrix::Ones(4, 1), y};
    CHECK(fit_ols(data)(0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("fit_ols matches a gradient-descent oracle and its normal equations") {
    RngStream rng(31);
    Matrix X = Matrix::NullaryExpr(50, 3, [&]() { return rng.normal(); });
    Vector y = Vector::NullaryExpr(50, [&]() { return rng.normal() * 2.0; });
    const RegressionDataset data{X, y};
    const Vector beta = fit_ols(data);
    const Vector oracle = oracles::minimize_quadratic(X, y);
    CHECK((beta - oracle).lpNorm<Eigen::Infinity>() <= 1e-8);
    const double resid = (X.transpose() * (y - X * beta)).lpNorm<Eigen::Infinity>();
    CHECK(resid <= 1e-8 * (X.transpose() * y).lpNorm<Eigen::Infinity>());
}

TEST_CASE("fit_ols rejects rank-deficient designs") {
    Matrix X(4, 2);
    X << 1, 2, 2, 4, 3, 6, 4, 8;
    const RegressionDataset data{X, Vector::Ones(4)};
    CHECK_THROWS_AS(fit_ols(data), SingularGram);
}

TEST_CASE("predict") {
    CHECK(predict(Vector::Zero(3), Matrix::Ones(4, 3)) == Vector::Zero(4));
    Vector beta(2);
    beta << 3, 7;
    CHECK(predict(beta, Matrix::Identity(2, 2)) == beta);
    Matrix X(2, 2);
    X << 1, 2, 3, 4;
    Vector expected(2);
    expected << 3, 7;
    CHECK(predict(Vector::Ones(2), X) == expected);
    CHECK_THROWS_AS(predict(Vector::Ones(3), Matrix::Ones(2, 2)), DimensionMismatch);
}

TEST_CASE("a large L1 lambda zeroes the shifts and recovers the pooled fit") {
    RngStream rng(32);
    auto inst = oracles::random_instance(rng, 15, 40, 12, 3, true);
    FusedProblem problem = assemble_problem(inst.target, inst.external, inst.selection,
                                            {PenaltyKind::L1, 1.0});
    const Vector pooled = fit_pooled(problem);
    const double lambda_big =
        10.0 * (problem.sub_y - problem.sub_X * pooled).cwiseAbs().maxCoeff();
    problem.penalty.lambda = lambda_big;

    const FitResult fit = fit_fused(problem);
    CHECK(fit.converged);
    CHECK(fit.gamma.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((fit.beta - pooled).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("iterative and closed-form L2 fits agree") {
    RngStream rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = oracles::random_instance(rng, 12, 30, 10, 3, trial % 2 == 0);
        const double lambda = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 1.0 : 5.0);
        const FusedProblem problem = assemble_problem(inst.target, inst.external, inst.selection,
                                                      {PenaltyKind::L2, lambda});
        SolverSettings settings;
        settings.tol = 1e-10;  // the gamma gap tracks the iteration tolerance
        const FitResult iterative = fit_fused(problem, settings);
        const FitResult direct = fit_fused_l2(problem);
        REQUIRE(iterative.converged);
        CHECK((iterative.beta - direct.beta).lpNorm<Eigen::Infinity>() <= 1e-8);
        CHECK((iterative.gamma - direct.gamma).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("fit_fused matches direct minimization of the robust objective") {
    RngStream rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const auto kind = trial % 2 == 0 ? PenaltyKind::L1 : PenaltyKind::L2;
        auto inst = oracles::random_instance(rng, 14, 35, 16, 3, true);
        const FusedProblem problem =
            assemble_problem(inst.target, inst.external, inst.selection, {kind, 1.0});
        const FitResult fit = fit_fused(problem);
        REQUIRE(fit.converged);
        const Vector oracle = oracles::minimize_robust_objective(problem);
        CHECK((fit.beta - oracle).lpNorm<Eigen::Infinity>() <= 1e-5);
    }
}

TEST_CASE("closed-form L2 with a huge lambda approaches the pooled fit") {
    RngStream rng(35);
    auto inst = oracles::random_instance(rng, 10, 25, 8, 2, true);
    const FusedProblem problem = assemble_problem(inst.target, inst.external, inst.selection,
                                                  {PenaltyKind::L2, 1e12});
    const FitResult fit = fit_fused_l2(problem);
    const Vector pooled = fit_pooled(problem);
    CHECK((fit.beta - pooled).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK(fit.gamma.lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("closed-form L2 on a single external row matches hand algebra") {
    // d = 1: target rows x = (1, 2), y = (1, 1); external row x = 3, y = 9, w = 1.
    // With lambda = 1, c = 1/2: beta = (1*1 + 2*1 + 0.5*3*9) / (1 + 4 + 0.5*9)
    RegressionDataset target;
    target.X = Matrix(2, 1);
    target.X << 1, 2;
    target.y = Vector(2);
    target.y << 1, 1;
    RegressionDataset external;
    external.X = Matrix(1, 1);
    external.X << 3;
    external.y = Vector(1);
    external.y << 9;
    SubsampleSelection sel;
    sel.indices = {0};
    sel.weights = Vector::Ones(1);
    sel.nominal_size = 1.0;
    sel.rate = 1.0;

    const FusedProblem problem = assemble_problem(target, external, sel, {PenaltyKind::L2, 1.0});
    const FitResult fit = fit_fused_l2(problem);
    const double beta_hand = (1.0 + 2.0 + 0.5 * 27.0) / (1.0 + 4.0 + 4.5);
    CHECK(fit.beta(0) == doctest::Approx(beta_hand).epsilon(1e-12));
    CHECK(fit.gamma(0) == doctest::Approx((9.0 - 3.0 * beta_hand) / 2.0).epsilon(1e-12));
}

TEST_CASE("fit_fused_l2 requires the L2 penalty") {
    RngStream rng(36);
    auto inst = oracles::random_instance(rng, 8, 20, 6, 2, false);
    const FusedProblem problem =
        assemble_problem(inst.target, inst.external, inst.selection, {PenaltyKind::L1, 1.0});
    CHECK_THROWS_AS(fit_fused_l2(problem), ValidationError);
}

TEST_CASE("combine_estimators") {
    RngStream rng(37);
    const Matrix V_T = Matrix::Identity(3, 3) * 2.0;
    FitResult a, b;
    a.beta = Vector::NullaryExpr(3, [&]() { return rng.normal(); });
    b.beta = a.beta;

    SUBCASE("equal inputs pass through") {
        Matrix V1 = Matrix::Identity(3, 3), V2 = Matrix::Identity(3, 3) * 3.0;
        const Vector combined = combine_estimators(a, b, V_T, V1, V2);
        CHECK((combined - a.beta).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SUBCASE("zero external information averages the two fits") {
        b.beta = Vector::NullaryExpr(3, [&]() { return rng.normal(); });
        const Matrix zero = Matrix::Zero(3, 3);
        const Vector combined = combine_estimators(a, b, V_T, zero, zero);
        CHECK((combined - 0.5 * (a.beta + b.beta)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SUBCASE("random instance matches an independent matrix path") {
        b.beta = Vector::NullaryExpr(3, [&]() { return rng.normal(); });
        Matrix A = Matrix::NullaryExpr(3, 3, [&]() { return rng.normal(); });
        Matrix B = Matrix::NullaryExpr(3, 3, [&]() { return rng.normal(); });
        const Matrix V1 = A * A.transpose();
        const Matrix V2 = B * B.transpose();
        const Vector combined = combine_estimators(a, b, V_T, V1, V2);
        const Matrix inv = oracles::gauss_jordan_inverse(2.0 * V_T + V1 + V2);
        const Vector expected = inv * ((V_T + V1) * a.beta + (V_T + V2) * b.beta);
        CHECK((combined - expected).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("fit_data_combined equals fit_fused on the assembled union") {
    RngStream rng(38);
    auto inst = oracles::random_instance(rng, 10, 30, 12, 3, true);
    const PenaltySpec penalty{PenaltyKind::L1, 0.8};
    const FitResult via_helper =
        fit_data_combined(inst.target, inst.external, inst.selection, penalty);
    const FitResult direct =
        fit_fused(assemble_problem(inst.target, inst.external, inst.selection, penalty));
    CHECK(via_helper.beta == direct.beta);
    CHECK(via_helper.gamma == direct.gamma);
}

TEST_CASE("the L1 objective trace is nonincreasing") {
    RngStream rng(39);
    auto inst = oracles::random_instance(rng, 12, 40, 20, 3, true);
    const FusedProblem problem =
        assemble_problem(inst.target, inst.external, inst.selection, {PenaltyKind::L1, 0.7});
    SolverSettings settings;
    settings.record_objective = true;
    const FitResult fit = fit_fused(problem, settings);
    REQUIRE(fit.objective_trace.size() >= 2);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
        CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-10);
    }
}

TEST_CASE("gamma entries follow the selection order") {
    RngStream rng(40);
    auto inst = oracles::random_instance(rng, 10, 30, 8, 2, false);
    const FusedProblem problem =
        assemble_problem(inst.target, inst.external, inst.selection, {PenaltyKind::L1, 0.5});
    const FitResult fit = fit_fused(problem);
    REQUIRE(fit.converged);
    for (Index e = 0; e < problem.n_sub(); ++e) {
        const double res = problem.sub_y(e) - problem.sub_X.row(e).dot(fit.beta);
        CHECK(fit.gamma(e) == doctest::Approx(theta(res, problem.penalty)).epsilon(1e-6));
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    RngStream rng(41);
    auto inst = oracles::random_instance(rng, 4, 200, 150, 2, false);
    const FusedProblem problem =
        assemble_problem(inst.target, inst.external, inst.selection, {PenaltyKind::L1, 0.05});
    SolverSettings settings;
    settings.max_iter = 2;
    const FitResult fit = fit_fused(problem, settings);
    CHECK(!fit.converged);
    CHECK(fit.iterations == 2);
    CHECK(fit.beta.size() == 2);
}

TEST_CASE("the solver never materializes the hat matrix") {
    RngStream rng(42);
    const Index n = 5000, d = 100;
    auto inst = oracles::random_instance(rng, 120, n, n, d, false);
    const FusedProblem problem =
        assemble_problem(inst.target, inst.external, inst.selection, {PenaltyKind::L1, 2.0});
    SolverSettings settings;
    settings.max_iter = 50;
    const FitResult fit = fit_fused(problem, settings);
    const std::size_t m = static_cast<std::size_t>(problem.n_sub());
    const std::size_t budget = 3 * (m * static_cast<std::size_t>(d) +
                                    static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    CHECK(fit.peak_aux_doubles <= budget);
    CHECK(fit.peak_aux_doubles < m * m / 4);
}

TEST_CASE("KKT residual is small on converged fits") {
    RngStream rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto kind = trial % 2 == 0 ? PenaltyKind::L1 : PenaltyKind::L2;
        auto inst = oracles::random_instance(rng, 12, 30, 10, 3, true);
        const FusedProblem problem =
            assemble_problem(inst.target, inst.external, inst.selection, {kind, 1.5});
        SolverSettings settings;
        const FitResult fit = fit_fused(problem, settings);
        REQUIRE(fit.converged);
        const double scale =
            std::max(1.0, (problem.target_X.transpose() * problem.target_y)
                              .lpNorm<Eigen::Infinity>());
        CHECK(fit.kkt_residual <= 100.0 * settings.tol * scale);
    }
}
