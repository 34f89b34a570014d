#include "qcl/neural.hpp"

#include <cmath>

#include "qcl/errors.hpp"

namespace qcl {

Mlp make_mlp(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.size() < 2)
        throw invalid_argument("make_mlp: need input and output sizes");
    for (int s : sizes)
        if (s < 1)
            throw invalid_argument("make_mlp: layer sizes must be >= 1");

    Mlp net;
    net.sizes = sizes;
    const std::size_t layers = sizes.size() - 1;
    net.weights.resize(layers);
    net.biases.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = static_cast<std::size_t>(sizes[l]);
        const std::size_t fan_out = static_cast<std::size_t>(sizes[l + 1]);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        net.weights[l].resize(fan_out * fan_in);
        for (double& w : net.weights[l])
            w = rng.uniform(-bound, bound);
        net.biases[l].resize(fan_out);
        for (double& b : net.biases[l])
            b = rng.uniform(-bound, bound);
    }
    return net;
}

Mlp make_control_net(int input_size, int output_size, Rng& rng) {
    return make_mlp({input_size, 64, 512, 256, output_size}, rng);
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                            ForwardCache& cache) {
    if (static_cast<int>(input.size()) != net.input_size())
        throw invalid_argument("forward: input length does not match net");

    const std::size_t layers = net.weights.size();
    cache.activations.assign(layers + 1, {});
    cache.pre.assign(layers, {});
    cache.activations[0] = input;

    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in_n = static_cast<std::size_t>(net.sizes[l]);
        const std::size_t out_n = static_cast<std::size_t>(net.sizes[l + 1]);
        const std::vector<double>& x = cache.activations[l];
        std::vector<double>& z = cache.pre[l];
        z.assign(out_n, 0.0);
        const double* w = net.weights[l].data();
        for (std::size_t i = 0; i < out_n; ++i) {
            double acc = net.biases[l][i];
            const double* row = w + i * in_n;
            for (std::size_t j = 0; j < in_n; ++j)
                acc += row[j] * x[j];
            z[i] = acc;
        }
        std::vector<double>& a = cache.activations[l + 1];
        if (l + 1 == layers) {
            a = z; // identity output layer
        } else {
            a.assign(out_n, 0.0);
            for (std::size_t i = 0; i < out_n; ++i)
                a[i] = z[i] > 0.0 ? z[i] : 0.0;
        }
    }
    return cache.activations.back();
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& input) {
    ForwardCache cache;
    return forward(net, input, cache);
}

MlpGrads zero_grads(const Mlp& net) {
    MlpGrads g;
    g.weights.resize(net.weights.size());
    g.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights[l].assign(net.weights[l].size(), 0.0);
        g.biases[l].assign(net.biases[l].size(), 0.0);
    }
    return g;
}

void backward(const Mlp& net, const ForwardCache& cache,
              const std::vector<double>& upstream, MlpGrads& grads) {
    const std::size_t layers = net.weights.size();
    if (cache.activations.size() != layers + 1 || cache.pre.size() != layers)
        throw contract_error("backward: forward cache missing or stale");
    if (upstream.size() != cache.activations.back().size())
        throw invalid_argument("backward: upstream length does not match "
                               "network output");

    std::vector<double> delta = upstream;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t in_n = static_cast<std::size_t>(net.sizes[l]);
        const std::size_t out_n = static_cast<std::size_t>(net.sizes[l + 1]);
        // Rectifier derivative for hidden layers; output layer is linear.
        if (l + 1 != layers)
            for (std::size_t i = 0; i < out_n; ++i)
                if (cache.pre[l][i] <= 0.0)
                    delta[i] = 0.0;

        const std::vector<double>& x = cache.activations[l];
        double* gw = grads.weights[l].data();
        for (std::size_t i = 0; i < out_n; ++i) {
            const double d = delta[i];
            grads.biases[l][i] += d;
            double* row = gw + i * in_n;
            for (std::size_t j = 0; j < in_n; ++j)
                row[j] += d * x[j];
        }

        if (l > 0) {
            std::vector<double> prev(in_n, 0.0);
            const double* w = net.weights[l].data();
            for (std::size_t i = 0; i < out_n; ++i) {
                const double d = delta[i];
                const double* row = w + i * in_n;
                for (std::size_t j = 0; j < in_n; ++j)
                    prev[j] += d * row[j];
            }
            delta = std::move(prev);
        }
    }
}

MlpGrads backward(const Mlp& net, const ForwardCache& cache,
                  const std::vector<double>& upstream) {
    MlpGrads g = zero_grads(net);
    backward(net, cache, upstream, g);
    return g;
}

AdamState make_adam(const Mlp& net) {
    AdamState st;
    st.m = zero_grads(net);
    st.v = zero_grads(net);
    return st;
}

namespace {

void adam_update(std::vector<double>& params, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v,
                 double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, double lr) {
    if (grads.weights.size() != net.weights.size())
        throw invalid_argument("adam_step: gradient shape does not match net");
    ++state.step_count;
    const double bc1 =
        1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 =
        1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(net.weights[l], grads.weights[l], state.m.weights[l],
                    state.v.weights[l], lr, state.beta1, state.beta2,
                    state.eps, bc1, bc2);
        adam_update(net.biases[l], grads.biases[l], state.m.biases[l],
                    state.v.biases[l], lr, state.beta1, state.beta2,
                    state.eps, bc1, bc2);
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0)
        throw invalid_argument("ReplayBuffer: capacity must be positive");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& t) {
    if (ring_.size() < capacity_) {
        ring_.push_back(t);
    } else {
        ring_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch,
                                             Rng& rng) const {
    if (batch > ring_.size())
        throw invalid_argument("ReplayBuffer: batch larger than buffer");
    // Partial Fisher-Yates over the index range: the first `batch`
    // positions end up holding a uniform sample without replacement.
    std::vector<std::size_t> idx(ring_.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t j = i + rng.uniform_int(idx.size() - i);
        std::swap(idx[i], idx[j]);
        out.push_back(ring_[idx[i]]);
    }
    return out;
}

} // namespace qcl
