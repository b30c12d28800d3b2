#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "subfuse/csv.hpp"
#include "subfuse/dataset.hpp"
#include "subfuse/rng.hpp"

using namespace subfuse;

namespace {

RegressionDataset small_dataset(Index n, Index d, double fill = 1.0) {
    RegressionDataset data;
    data.X = Matrix::Constant(n, d, fill);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 1; j < d; ++j) data.X(i, j) = fill + static_cast<double>(i + j);
    }
    data.y = Vector::LinSpaced(n, 0.0, static_cast<double>(n - 1));
    return data;
}

}  // namespace

TEST_CASE("validate_dataset accepts a finite matching pair") {
    RegressionDataset data = small_dataset(3, 2);
    CHECK_NOTHROW(validate_dataset(data));
}

TEST_CASE("validate_dataset rejects row count mismatch") {
    RegressionDataset data = small_dataset(3, 2);
    data.y = Vector::Zero(4);
    CHECK_THROWS_AS(validate_dataset(data), DimensionMismatch);
}

TEST_CASE("validate_dataset reports the NaN position") {
    RegressionDataset data = small_dataset(3, 2);
    data.X(2, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        validate_dataset(data);
        FAIL("expected NonFiniteEntry");
    } catch (const NonFiniteEntry& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }
}

TEST_CASE("assemble_problem gathers the selected rows") {
    RegressionDataset target = small_dataset(5, 2);
    RegressionDataset external = small_dataset(8, 2, 2.0);
    SubsampleSelection sel;
    sel.indices = {1, 4};
    sel.weights = Vector::Constant(2, 2.0);
    sel.nominal_size = 2.0;
    sel.rate = 0.25;

    const FusedProblem problem = assemble_problem(target, external, sel, {PenaltyKind::L1, 1.0});
    CHECK(problem.n_target() == 5);
    CHECK(problem.n_sub() == 2);
    CHECK(problem.sub_X.row(0) == external.X.row(1));
    CHECK(problem.sub_X.row(1) == external.X.row(4));
    CHECK(problem.sub_y(0) == external.y(1));
    CHECK(problem.weights(1) == 2.0);

    // deterministic and side-effect free
    const FusedProblem again = assemble_problem(target, external, sel, {PenaltyKind::L1, 1.0});
    CHECK(again.sub_X == problem.sub_X);
    CHECK(again.sub_y == problem.sub_y);
}

TEST_CASE("assemble_problem rejects out-of-range indices") {
    RegressionDataset target = small_dataset(5, 2);
    RegressionDataset external = small_dataset(8, 2);
    SubsampleSelection sel;
    sel.indices = {9};
    sel.weights = Vector::Ones(1);
    CHECK_THROWS_AS(assemble_problem(target, external, sel, {}), IndexOutOfRange);
}

TEST_CASE("assemble_problem rejects underdetermined fusions") {
    RegressionDataset target = small_dataset(1, 3);
    target.X(0, 1) = 2.0;
    target.X(0, 2) = 3.0;
    RegressionDataset external = small_dataset(4, 3);
    SubsampleSelection sel;
    sel.indices = {2};
    sel.weights = Vector::Ones(1);
    CHECK_THROWS_AS(assemble_problem(target, external, sel, {}), UnderdeterminedProblem);
}

TEST_CASE("assemble_problem rejects column count mismatch and empty selections") {
    RegressionDataset target = small_dataset(5, 2);
    RegressionDataset external = small_dataset(8, 3);
    SubsampleSelection sel;
    sel.indices = {1};
    sel.weights = Vector::Ones(1);
    CHECK_THROWS_AS(assemble_problem(target, external, sel, {}), ColumnCountMismatch);

    RegressionDataset external2 = small_dataset(8, 2);
    SubsampleSelection empty;
    CHECK_THROWS_AS(assemble_problem(target, external2, empty, {}), EmptyInput);
}

TEST_CASE("dataset CSV round trip is exact") {
    RngStream rng(77);
    RegressionDataset data;
    data.X = Matrix::NullaryExpr(17, 4, [&]() { return rng.normal() * std::exp(8.0 * rng.uniform() - 4.0); });
    data.y = Vector::NullaryExpr(17, [&]() { return rng.normal(); });

    const std::string path =
        (std::filesystem::temp_directory_path() / "subfuse_roundtrip.csv").string();
    write_dataset_csv(path, data);
    const RegressionDataset back = read_dataset_csv(path, /*add_intercept=*/false);
    std::remove(path.c_str());

    REQUIRE(back.X.rows() == data.X.rows());
    REQUIRE(back.X.cols() == data.X.cols());
    CHECK(back.X == data.X);
    CHECK(back.y == data.y);
}
