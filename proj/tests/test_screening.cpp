#include <doctest.h>

#include <cmath>

#include "subfuse/rng.hpp"
#include "subfuse/screening.hpp"

using namespace subfuse;

TEST_CASE("an overwhelming signal is always selected") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(RngStream::derive_seed(90, {seed}));
        const Index n = 100;
        Matrix Z = Matrix::NullaryExpr(n, 4, [&]() { return rng.normal(); });
        Vector y = 5.0 * Z.col(1) + Vector::NullaryExpr(n, [&]() { return rng.normal(); });
        const auto result = screen_covariates(Z, y, 0.1);
        CHECK(result.rows[1].selected);
        CHECK(std::abs(result.rows[1].t_stat) > 10.0);
    }
}

TEST_CASE("a constant column is never selected") {
    RngStream rng(91);
    Matrix Z = Matrix::NullaryExpr(50, 3, [&]() { return rng.normal(); });
    Z.col(2).setConstant(4.2);
    Vector y = 3.0 * Z.col(0) + Vector::NullaryExpr(50, [&]() { return rng.normal(); });
    const auto result = screen_covariates(Z, y, 0.1);
    CHECK(result.rows[2].degenerate);
    CHECK(result.rows[2].p_value == 1.0);
    CHECK(!result.rows[2].selected);
}

TEST_CASE("BH controls false selections under the global null") {
    int seeds_with_selection = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        RngStream rng(RngStream::derive_seed(92, {static_cast<std::uint64_t>(s)}));
        const Index n = 50;
        Matrix Z = Matrix::NullaryExpr(n, 10, [&]() { return rng.normal(); });
        Vector y = Vector::NullaryExpr(n, [&]() { return rng.normal(); });
        const auto result = screen_covariates(Z, y, 0.1);
        bool any = false;
        for (const auto& row : result.rows) any |= row.selected;
        if (any) ++seeds_with_selection;
    }
    // under the global null P(any selection) <= q = 0.1; allow Monte-Carlo slack
    CHECK(seeds_with_selection <= static_cast<int>(seeds * 0.15));
}

TEST_CASE("p-values are two-sided and in [0, 1]") {
    RngStream rng(93);
    Matrix Z = Matrix::NullaryExpr(40, 5, [&]() { return rng.normal(); });
    Vector y = Z.col(3) - 2.0 * Z.col(4) + Vector::NullaryExpr(40, [&]() { return rng.normal(); });
    const auto result = screen_covariates(Z, y, 0.1);
    for (const auto& row : result.rows) {
        CHECK(row.p_value >= 0.0);
        CHECK(row.p_value <= 1.0);
    }
    CHECK_THROWS_AS(screen_covariates(Z, Vector::Ones(3), 0.1), DimensionMismatch);
    CHECK_THROWS_AS(screen_covariates(Z, y, 1.5), ValidationError);
}

TEST_CASE("screening needs more than two rows") {
    Matrix Z = Matrix::Ones(2, 2);
    Vector y = Vector::Ones(2);
    CHECK_THROWS_AS(screen_covariates(Z, y, 0.1), ValidationError);
}
