#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qtrade/rng.hpp"

namespace qtrade {

// Dueling Q-network: two parallel towers (action values and state value)
// with no shared parameters. Each tower is
//   affine -> LayerNorm -> tanh -> affine -> LayerNorm -> tanh -> affine,
// combined as q = v + a - mean(a). All math is 64-bit and hand-derived;
// no autodiff framework.

struct MlpSpec {
    std::size_t input_dim = 180;
    std::array<std::size_t, 2> hidden{64, 64};
    std::size_t action_out = 3;
    std::size_t state_out = 1;

    void validate() const;
};

struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a; // row-major

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

struct Dense {
    Mat w; // out x in
    std::vector<double> b;
};

struct LayerNormParams {
    std::vector<double> gamma, beta;
};

struct Tower {
    Dense fc1;
    LayerNormParams ln1;
    Dense fc2;
    LayerNormParams ln2;
    Dense out;
};

struct QNet {
    Tower action_value;
    Tower state_value;
};

// Online and target copies plus the frozen scalar `eps` slot. The scalar
// is bookkeeping only: it is stored, serialized and counted, but never
// trained and never enters the forward pass.
struct NetParams {
    MlpSpec spec;
    QNet online;
    QNet target;
    double eps_param = 1.0;
};

// Total stored scalars: both towers, online + target, + eps.
std::size_t param_count(const MlpSpec& spec);

// Glorot-uniform weights, zero biases, LayerNorm gamma 1 / beta 0;
// target starts as an exact copy of online.
NetParams init_params(const MlpSpec& spec, Rng& rng);

// y = gamma * (x - mean)/sqrt(var + 1e-5) + beta, population variance.
std::vector<double> layer_norm(std::span<const double> x,
                               std::span<const double> gamma,
                               std::span<const double> beta);

struct TowerCache {
    std::vector<double> input;
    std::vector<double> z1, xhat1, h1;
    std::vector<double> z2, xhat2, h2;
    std::vector<double> out;
    double istd1 = 0.0, istd2 = 0.0;
};

struct ForwardCache {
    TowerCache action;
    TowerCache state;
    std::array<double, 3> q{};
};

// Forward one observation through a tower (output layer linear).
std::vector<double> forward_tower(const Tower& tower, std::span<const double> obs,
                                  TowerCache* cache = nullptr);

// q = v + a - mean(a). Pass a cache to enable backward().
std::array<double, 3> forward_q(const QNet& net, std::span<const double> obs,
                                ForwardCache* cache = nullptr);

// Zero-initialized gradient holder with the same shapes as `net`.
QNet zero_grads(const MlpSpec& spec);

// Accumulate exact gradients of every trainable parameter into `grads`
// given dL/dq from a cached forward pass.
void backward(const QNet& net, const ForwardCache& cache,
              const std::array<double, 3>& dq, QNet& grads);

struct AdamState {
    QNet m, v;
    std::uint64_t step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

AdamState init_adam(const MlpSpec& spec);

// One bias-corrected Adam update of the online parameters.
void adam_step(QNet& params, const QNet& grads, AdamState& state, double lr);

// target <- online, exact copy.
void hard_update_target(NetParams& params);

// Visit every tensor of a QNet in the fixed serialization order:
// action tower (fc1.w, fc1.b, ln1.gamma, ln1.beta, fc2.w, fc2.b,
// ln2.gamma, ln2.beta, out.w, out.b), then the state tower likewise.
template <typename Net, typename Fn>
void visit_tensors(Net& net, Fn&& fn) {
    auto tower = [&fn](auto& t) {
        fn(t.fc1.w.a);
        fn(t.fc1.b);
        fn(t.ln1.gamma);
        fn(t.ln1.beta);
        fn(t.fc2.w.a);
        fn(t.fc2.b);
        fn(t.ln2.gamma);
        fn(t.ln2.beta);
        fn(t.out.w.a);
        fn(t.out.b);
    };
    tower(net.action_value);
    tower(net.state_value);
}

// Flat binary checkpoint: header with dims and an endianness tag, then
// raw doubles in visit order (online, target, eps). Bit-exact round trip.
void save_params(const NetParams& params, const std::string& path);
NetParams load_params(const std::string& path);

} // namespace qtrade
