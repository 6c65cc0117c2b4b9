#include "qtrade/net.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qtrade/errors.hpp"

namespace qtrade {

namespace {

constexpr double kLnEps = 1e-5;

std::size_t tower_param_count(std::size_t in, std::size_t h1, std::size_t h2,
                              std::size_t out) {
    std::size_t n = 0;
    n += h1 * in + h1;  // fc1
    n += 2 * h1;        // ln1
    n += h2 * h1 + h2;  // fc2
    n += 2 * h2;        // ln2
    n += out * h2 + out; // out
    return n;
}

Dense make_dense(std::size_t out, std::size_t in) {
    Dense d;
    d.w.rows = out;
    d.w.cols = in;
    d.w.a.assign(out * in, 0.0);
    d.b.assign(out, 0.0);
    return d;
}

LayerNormParams make_ln(std::size_t n) {
    LayerNormParams p;
    p.gamma.assign(n, 1.0);
    p.beta.assign(n, 0.0);
    return p;
}

Tower make_tower(const MlpSpec& spec, std::size_t out_dim) {
    Tower t;
    t.fc1 = make_dense(spec.hidden[0], spec.input_dim);
    t.ln1 = make_ln(spec.hidden[0]);
    t.fc2 = make_dense(spec.hidden[1], spec.hidden[0]);
    t.ln2 = make_ln(spec.hidden[1]);
    t.out = make_dense(out_dim, spec.hidden[1]);
    return t;
}

void glorot_fill(Mat& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / double(w.rows + w.cols));
    for (double& x : w.a) x = (2.0 * rng.uniform01() - 1.0) * bound;
}

// y = W x + b
void affine(const Dense& d, std::span<const double> x, std::vector<double>& y) {
    y.assign(d.w.rows, 0.0);
    for (std::size_t r = 0; r < d.w.rows; ++r) {
        const double* wr = d.w.a.data() + r * d.w.cols;
        double acc = d.b[r];
        for (std::size_t c = 0; c < d.w.cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

// Normalize z in place into xhat and y; returns 1/sqrt(var + eps).
double ln_forward(std::span<const double> z, const LayerNormParams& p,
                  std::vector<double>& xhat, std::vector<double>& y) {
    const std::size_t n = z.size();
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= double(n);
    double var = 0.0;
    for (double v : z) {
        const double d = v - mean;
        var += d * d;
    }
    var /= double(n);
    const double istd = 1.0 / std::sqrt(var + kLnEps);
    xhat.resize(n);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        xhat[i] = (z[i] - mean) * istd;
        y[i] = p.gamma[i] * xhat[i] + p.beta[i];
    }
    return istd;
}

// dL/dz given dL/dy, with xhat and istd from the forward pass.
// dxhat_i = g_i * gamma_i; dz_i = istd/N * (N*dxhat_i - sum(dxhat) - xhat_i * sum(dxhat .* xhat)).
void ln_backward(std::span<const double> dy, const LayerNormParams& p,
                 std::span<const double> xhat, double istd,
                 std::vector<double>& dz, std::vector<double>& dgamma,
                 std::vector<double>& dbeta) {
    const std::size_t n = dy.size();
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    dz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dxhat = dy[i] * p.gamma[i];
        dz[i] = dxhat; // temporarily store dxhat
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat[i];
    }
    const double inv_n = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        dz[i] = istd * (dz[i] - inv_n * sum_dxhat - xhat[i] * inv_n * sum_dxhat_xhat);
        dgamma[i] += dy[i] * xhat[i];
        dbeta[i] += dy[i];
    }
}

// Accumulate dL/dW, dL/db and produce dL/dx for y = W x + b.
void affine_backward(const Dense& d, std::span<const double> x,
                     std::span<const double> dy, Dense& grad,
                     std::vector<double>* dx) {
    for (std::size_t r = 0; r < d.w.rows; ++r) {
        const double g = dy[r];
        grad.b[r] += g;
        double* gw = grad.w.a.data() + r * d.w.cols;
        for (std::size_t c = 0; c < d.w.cols; ++c) gw[c] += g * x[c];
    }
    if (dx) {
        dx->assign(d.w.cols, 0.0);
        for (std::size_t r = 0; r < d.w.rows; ++r) {
            const double g = dy[r];
            const double* wr = d.w.a.data() + r * d.w.cols;
            for (std::size_t c = 0; c < d.w.cols; ++c) (*dx)[c] += g * wr[c];
        }
    }
}

// Backprop through one tower; returns parameter gradients into `grad`.
void tower_backward(const Tower& t, const TowerCache& cache,
                    std::span<const double> dout, Tower& grad) {
    std::vector<double> dh2;
    affine_backward(t.out, cache.h2, dout, grad.out, &dh2);

    // tanh: dL/d(ln2 output) = dh2 * (1 - h2^2)
    for (std::size_t i = 0; i < dh2.size(); ++i) dh2[i] *= 1.0 - cache.h2[i] * cache.h2[i];

    std::vector<double> dz2;
    ln_backward(dh2, t.ln2, cache.xhat2, cache.istd2, dz2, grad.ln2.gamma, grad.ln2.beta);

    std::vector<double> dh1;
    affine_backward(t.fc2, cache.h1, dz2, grad.fc2, &dh1);

    for (std::size_t i = 0; i < dh1.size(); ++i) dh1[i] *= 1.0 - cache.h1[i] * cache.h1[i];

    std::vector<double> dz1;
    ln_backward(dh1, t.ln1, cache.xhat1, cache.istd1, dz1, grad.ln1.gamma, grad.ln1.beta);

    affine_backward(t.fc1, cache.input, dz1, grad.fc1, nullptr);
}

void adam_update_vec(std::vector<double>& p, const std::vector<double>& g,
                     std::vector<double>& m, std::vector<double>& v,
                     double lr, double b1, double b2, double eps,
                     double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

constexpr std::uint32_t kMagic = 0x51544e31;   // "QTN1"
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kEndianTag = 0x01020304;

void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::ifstream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::uint64_t get_u64(std::ifstream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

} // namespace

void MlpSpec::validate() const {
    if (input_dim == 0) throw ConfigError("network input_dim must be positive");
    if (hidden[0] == 0 || hidden[1] == 0)
        throw ConfigError("network hidden widths must be positive");
    if (action_out == 0 || state_out == 0)
        throw ConfigError("network output widths must be positive");
}

std::size_t param_count(const MlpSpec& spec) {
    const std::size_t one =
        tower_param_count(spec.input_dim, spec.hidden[0], spec.hidden[1], spec.action_out) +
        tower_param_count(spec.input_dim, spec.hidden[0], spec.hidden[1], spec.state_out);
    return 2 * one + 1; // online + target + frozen eps scalar
}

NetParams init_params(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    NetParams p;
    p.spec = spec;
    p.online.action_value = make_tower(spec, spec.action_out);
    p.online.state_value = make_tower(spec, spec.state_out);
    auto fill_tower = [&rng](Tower& t) {
        glorot_fill(t.fc1.w, rng);
        glorot_fill(t.fc2.w, rng);
        glorot_fill(t.out.w, rng);
    };
    fill_tower(p.online.action_value);
    fill_tower(p.online.state_value);
    p.target = p.online;
    p.eps_param = 1.0;
    return p;
}

std::vector<double> layer_norm(std::span<const double> x,
                               std::span<const double> gamma,
                               std::span<const double> beta) {
    if (x.size() != gamma.size() || x.size() != beta.size() || x.empty())
        throw std::invalid_argument("layer_norm: size mismatch");
    LayerNormParams p;
    p.gamma.assign(gamma.begin(), gamma.end());
    p.beta.assign(beta.begin(), beta.end());
    std::vector<double> xhat, y;
    ln_forward(x, p, xhat, y);
    return y;
}

std::vector<double> forward_tower(const Tower& tower, std::span<const double> obs,
                                  TowerCache* cache) {
    if (obs.size() != tower.fc1.w.cols)
        throw ContractError("forward_tower: observation size mismatch");
    TowerCache local;
    TowerCache& c = cache ? *cache : local;
    c.input.assign(obs.begin(), obs.end());

    affine(tower.fc1, c.input, c.z1);
    std::vector<double> y1;
    c.istd1 = ln_forward(c.z1, tower.ln1, c.xhat1, y1);
    c.h1.resize(y1.size());
    for (std::size_t i = 0; i < y1.size(); ++i) c.h1[i] = std::tanh(y1[i]);

    affine(tower.fc2, c.h1, c.z2);
    std::vector<double> y2;
    c.istd2 = ln_forward(c.z2, tower.ln2, c.xhat2, y2);
    c.h2.resize(y2.size());
    for (std::size_t i = 0; i < y2.size(); ++i) c.h2[i] = std::tanh(y2[i]);

    affine(tower.out, c.h2, c.out);
    return c.out;
}

std::array<double, 3> forward_q(const QNet& net, std::span<const double> obs,
                                ForwardCache* cache) {
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    const std::vector<double> a = forward_tower(net.action_value, obs, &c.action);
    const std::vector<double> v = forward_tower(net.state_value, obs, &c.state);
    if (a.size() != 3 || v.size() != 1)
        throw ContractError("forward_q: expected 3 action values and 1 state value");
    const double mean_a = (a[0] + a[1] + a[2]) / 3.0;
    std::array<double, 3> q{};
    for (std::size_t i = 0; i < 3; ++i) q[i] = v[0] + a[i] - mean_a;
    c.q = q;
    return q;
}

QNet zero_grads(const MlpSpec& spec) {
    QNet g;
    g.action_value = make_tower(spec, spec.action_out);
    g.state_value = make_tower(spec, spec.state_out);
    // make_tower sets LayerNorm gamma to 1; gradients start at zero.
    visit_tensors(g, [](std::vector<double>& t) { std::fill(t.begin(), t.end(), 0.0); });
    return g;
}

void backward(const QNet& net, const ForwardCache& cache,
              const std::array<double, 3>& dq, QNet& grads) {
    // q_i = v + a_i - mean(a)  =>  dL/da_i = dq_i - mean(dq), dL/dv = sum(dq).
    const double mean_dq = (dq[0] + dq[1] + dq[2]) / 3.0;
    std::array<double, 3> da{dq[0] - mean_dq, dq[1] - mean_dq, dq[2] - mean_dq};
    std::array<double, 1> dv{dq[0] + dq[1] + dq[2]};
    tower_backward(net.action_value, cache.action, da, grads.action_value);
    tower_backward(net.state_value, cache.state, dv, grads.state_value);
}

AdamState init_adam(const MlpSpec& spec) {
    AdamState s;
    s.m = zero_grads(spec);
    s.v = zero_grads(spec);
    return s;
}

void adam_step(QNet& params, const QNet& grads, AdamState& state, double lr) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));

    std::vector<std::vector<double>*> ps, ms, vs;
    std::vector<const std::vector<double>*> gs;
    visit_tensors(params, [&ps](std::vector<double>& t) { ps.push_back(&t); });
    visit_tensors(const_cast<QNet&>(grads),
                  [&gs](std::vector<double>& t) { gs.push_back(&t); });
    visit_tensors(state.m, [&ms](std::vector<double>& t) { ms.push_back(&t); });
    visit_tensors(state.v, [&vs](std::vector<double>& t) { vs.push_back(&t); });

    for (std::size_t i = 0; i < ps.size(); ++i)
        adam_update_vec(*ps[i], *gs[i], *ms[i], *vs[i], lr, state.beta1,
                        state.beta2, state.eps, bc1, bc2);
}

void hard_update_target(NetParams& params) { params.target = params.online; }

void save_params(const NetParams& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path);
    put_u32(os, kMagic);
    put_u32(os, kVersion);
    put_u32(os, kEndianTag);
    put_u64(os, params.spec.input_dim);
    put_u64(os, params.spec.hidden[0]);
    put_u64(os, params.spec.hidden[1]);
    put_u64(os, params.spec.action_out);
    put_u64(os, params.spec.state_out);
    auto dump = [&os](const QNet& net) {
        visit_tensors(const_cast<QNet&>(net), [&os](std::vector<double>& t) {
            os.write(reinterpret_cast<const char*>(t.data()),
                     std::streamsize(t.size() * sizeof(double)));
        });
    };
    dump(params.online);
    dump(params.target);
    os.write(reinterpret_cast<const char*>(&params.eps_param), sizeof(double));
    if (!os) throw DataError("failed writing checkpoint: " + path);
}

NetParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    if (get_u32(is) != kMagic) throw DataError("not a checkpoint file: " + path);
    if (get_u32(is) != kVersion) throw DataError("unsupported checkpoint version: " + path);
    if (get_u32(is) != kEndianTag)
        throw DataError("checkpoint byte order mismatch: " + path);
    MlpSpec spec;
    spec.input_dim = get_u64(is);
    spec.hidden[0] = get_u64(is);
    spec.hidden[1] = get_u64(is);
    spec.action_out = get_u64(is);
    spec.state_out = get_u64(is);
    spec.validate();

    NetParams p;
    p.spec = spec;
    p.online.action_value = make_tower(spec, spec.action_out);
    p.online.state_value = make_tower(spec, spec.state_out);
    p.target = p.online;
    auto slurp = [&is, &path](QNet& net) {
        visit_tensors(net, [&is, &path](std::vector<double>& t) {
            is.read(reinterpret_cast<char*>(t.data()),
                    std::streamsize(t.size() * sizeof(double)));
            if (!is) throw DataError("truncated checkpoint: " + path);
        });
    };
    slurp(p.online);
    slurp(p.target);
    is.read(reinterpret_cast<char*>(&p.eps_param), sizeof(double));
    if (!is) throw DataError("truncated checkpoint: " + path);
    return p;
}

} // namespace qtrade
