#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "mogam/matrix.hpp"

namespace mogam {

// Named parameter slots. Ordered map so that iteration, initialization and
// serialization all agree on one deterministic order.
using ParamMap = std::map<std::string, Matrix>;

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::int64_t step_count = 0;
    ParamMap first_moment;   // m, same shapes as the parameters
    ParamMap second_moment;  // v
};

AdamState make_adam_state(const ParamMap& params, const AdamConfig& config);

// One Adam update with bias correction; mutates params and state in place.
// Throws std::runtime_error if any gradient entry is NaN/Inf, naming the slot.
void adam_step(ParamMap& params, const std::map<std::string, Matrix>& grads, AdamState& state);

}  // namespace mogam
