#include "mogam/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mogam {

AdamState make_adam_state(const ParamMap& params, const AdamConfig& config) {
    if (config.beta1 <= 0.0 || config.beta1 >= 1.0 || config.beta2 <= 0.0 ||
        config.beta2 >= 1.0) {
        throw std::invalid_argument("adam: beta1 and beta2 must lie in (0, 1)");
    }
    if (config.epsilon <= 0.0) throw std::invalid_argument("adam: epsilon must be > 0");
    AdamState state;
    state.config = config;
    for (const auto& [name, value] : params) {
        state.first_moment.emplace(name, Matrix(value.rows(), value.cols(), 0.0));
        state.second_moment.emplace(name, Matrix(value.rows(), value.cols(), 0.0));
    }
    return state;
}

void adam_step(ParamMap& params, const std::map<std::string, Matrix>& grads, AdamState& state) {
    for (const auto& [name, g] : grads) {
        if (!all_finite(g)) {
            throw std::runtime_error("adam_step: non-finite gradient in slot '" + name + "'");
        }
    }
    state.step_count += 1;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));

    for (auto& [name, theta] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;  // slot untouched this step
        const Matrix& g = git->second;
        if (!theta.same_shape(g)) {
            throw std::invalid_argument("adam_step: gradient shape for '" + name +
                                        "' does not match parameter");
        }
        Matrix& m = state.first_moment.at(name);
        Matrix& v = state.second_moment.at(name);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g.data()[i];
            m.data()[i] = c.beta1 * m.data()[i] + (1.0 - c.beta1) * gi;
            v.data()[i] = c.beta2 * v.data()[i] + (1.0 - c.beta2) * gi * gi;
            const double m_hat = m.data()[i] / bc1;
            const double v_hat = v.data()[i] / bc2;
            theta.data()[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
        }
    }
}

}  // namespace mogam
