#include "limbnet/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace limbnet {

void adam_step_span(double* params, const double* grads, std::size_t n,
                    AdamState& state, std::size_t state_offset,
                    const AdamConfig& cfg, long t) {
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
    if (state_offset + n > state.m.size())
        throw std::invalid_argument("adam_step: state slice " + std::to_string(state_offset) +
                                    "+" + std::to_string(n) + " exceeds state size " +
                                    std::to_string(state.m.size()));
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    double* m = state.m.data() + state_offset;
    double* v = state.v.data() + state_offset;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg, long t) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size())
        throw std::invalid_argument(
            "adam_step: params/grads/state sizes differ: " + std::to_string(params.size()) +
            "/" + std::to_string(grads.size()) + "/" + std::to_string(state.m.size()));
    adam_step_span(params.data(), grads.data(), params.size(), state, 0, cfg, t);
}

}  // namespace limbnet
