#pragma once

#include <cstddef>
#include <vector>

namespace limbnet {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment estimates over one flat parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam update, in place. t is the 1-based step count.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg, long t);

// Same update over a sub-range: params/grads point at n values, state
// offset selects the matching moment slice. Lets the training loop walk
// a structured parameter set block by block against one flat state.
void adam_step_span(double* params, const double* grads, std::size_t n,
                    AdamState& state, std::size_t state_offset,
                    const AdamConfig& cfg, long t);

}  // namespace limbnet
