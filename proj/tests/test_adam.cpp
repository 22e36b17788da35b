#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mogam/adam.hpp"

using namespace mogam;

namespace {

ParamMap single_param(double value) {
    ParamMap p;
    p.emplace("w", Matrix::from_rows({{value}}));
    return p;
}

}  // namespace

TEST_CASE("first step with unit gradient moves by about -lr") {
    // With m̂ = v̂ = 1 on the first step, the update is lr / (1 + eps).
    AdamConfig cfg;
    cfg.lr = 1e-3;
    auto params = single_param(0.0);
    auto state = make_adam_state(params, cfg);
    std::map<std::string, Matrix> grads{{"w", Matrix::from_rows({{1.0}})}};
    adam_step(params, grads, state);
    CHECK(state.step_count == 1);
    CHECK(params.at("w")(0, 0) == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("zero gradient with zero moments leaves parameters untouched") {
    auto params = single_param(0.75);
    auto state = make_adam_state(params, {});
    std::map<std::string, Matrix> grads{{"w", Matrix(1, 1, 0.0)}};
    adam_step(params, grads, state);
    CHECK(params.at("w")(0, 0) == 0.75);
}

TEST_CASE("two steps with constant gradient match an independent trace") {
    AdamConfig cfg;
    cfg.lr = 0.1;
    auto params = single_param(1.0);
    auto state = make_adam_state(params, cfg);
    const double g = 0.5;
    std::map<std::string, Matrix> grads{{"w", Matrix::from_rows({{g}})}};

    // Spreadsheet-style replay of the recurrences.
    double m = 0.0, v = 0.0, theta = 1.0;
    for (int t = 1; t <= 2; ++t) {
        m = cfg.beta1 * m + (1 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
        const double m_hat = m / (1 - std::pow(cfg.beta1, t));
        const double v_hat = v / (1 - std::pow(cfg.beta2, t));
        theta -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        adam_step(params, grads, state);
    }
    CHECK(params.at("w")(0, 0) == doctest::Approx(theta).epsilon(1e-15));
    CHECK(state.step_count == 2);
}

TEST_CASE("lr = 0 leaves parameters bitwise unchanged") {
    AdamConfig cfg;
    cfg.lr = 0.0;
    ParamMap params;
    params.emplace("w", Matrix::from_rows({{0.123456789, -42.0}, {0.0, -0.0}}));
    Matrix before = params.at("w");
    auto state = make_adam_state(params, cfg);
    std::map<std::string, Matrix> grads{{"w", Matrix::from_rows({{1.0, -3.0}, {0.5, 2.0}})}};
    for (int i = 0; i < 3; ++i) adam_step(params, grads, state);
    CHECK(bitwise_equal(params.at("w"), before));
}

TEST_CASE("non-finite gradients abort the step") {
    auto params = single_param(0.0);
    auto state = make_adam_state(params, {});
    std::map<std::string, Matrix> grads{
        {"w", Matrix::from_rows({{std::numeric_limits<double>::quiet_NaN()}})}};
    CHECK_THROWS_WITH_AS(adam_step(params, grads, state), doctest::Contains("'w'"),
                         std::runtime_error);
    // The failed step must not advance the counter.
    CHECK(state.step_count == 0);
}

TEST_CASE("invalid hyperparameters are rejected") {
    auto params = single_param(0.0);
    AdamConfig bad;
    bad.beta1 = 1.0;
    CHECK_THROWS_AS(make_adam_state(params, bad), std::invalid_argument);
    bad = {};
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(make_adam_state(params, bad), std::invalid_argument);
}
