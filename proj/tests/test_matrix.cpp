#include <doctest.h>

#include <limits>
#include <stdexcept>

#include "mogam/matrix.hpp"

using mogam::Matrix;

TEST_CASE("matmul basics") {
    auto a = Matrix::from_rows({{1, 2}, {3, 4}});
    auto b = Matrix::from_rows({{5, 6}, {7, 8}});
    auto c = mogam::matmul(a, b);
    CHECK(c(0, 0) == 19);
    CHECK(c(0, 1) == 22);
    CHECK(c(1, 0) == 43);
    CHECK(c(1, 1) == 50);
    CHECK_THROWS_AS(mogam::matmul(a, Matrix(3, 2)), std::invalid_argument);
}

TEST_CASE("identity and transpose") {
    auto i = Matrix::identity(3);
    auto a = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(mogam::bitwise_equal(mogam::matmul(i, a), a));
    auto at = mogam::transpose(a);
    CHECK(at(0, 1) == 4);
    CHECK(at(2, 0) == 3);
    CHECK(mogam::bitwise_equal(mogam::transpose(at), a));
}

TEST_CASE("elementwise helpers check shapes") {
    Matrix a(2, 2, 1.0), b(2, 3, 1.0);
    CHECK_THROWS_AS(mogam::add(a, b), std::invalid_argument);
    CHECK_THROWS_AS(mogam::hadamard(a, b), std::invalid_argument);
    CHECK(mogam::max_abs_diff(mogam::scale(a, 2.0), mogam::add(a, a)) == 0.0);
}

TEST_CASE("all_finite flags non-finite entries") {
    Matrix a(2, 2, 0.0);
    CHECK(mogam::all_finite(a));
    a(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(mogam::all_finite(a));
    a(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(mogam::all_finite(a));
}
