#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "qcl/rng.hpp"

namespace qcl {

// Fully connected net with rectified-linear hidden layers and an identity
// output layer. weights[l] is row-major sizes[l+1] x sizes[l].
struct Mlp {
    std::vector<int> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int n_layers() const { return static_cast<int>(weights.size()); }
    int input_size() const { return sizes.front(); }
    int output_size() const { return sizes.back(); }
};

// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Mlp make_mlp(const std::vector<int>& sizes, Rng& rng);

// The agent architecture: hidden widths fixed at 64, 512, 256.
Mlp make_control_net(int input_size, int output_size, Rng& rng);

struct ForwardCache {
    // activations[0] is the input, activations[l+1] the output of layer l
    // after its nonlinearity; pre[l] is layer l before the nonlinearity.
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre;
};

std::vector<double> forward(const Mlp& net, const std::vector<double>& input);
std::vector<double> forward(const Mlp& net, const std::vector<double>& input,
                            ForwardCache& cache);

struct MlpGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

MlpGrads zero_grads(const Mlp& net);

// Reverse-mode gradients of a scalar loss given dLoss/dOutput. The
// accumulating overload adds into `grads` so minibatch sums need no
// temporaries.
void backward(const Mlp& net, const ForwardCache& cache,
              const std::vector<double>& upstream, MlpGrads& grads);
MlpGrads backward(const Mlp& net, const ForwardCache& cache,
                  const std::vector<double>& upstream);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step_count = 0;
    MlpGrads m;
    MlpGrads v;
};

AdamState make_adam(const Mlp& net);

// One bias-corrected Adam step in the direction that decreases the loss.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, double lr);

struct Transition {
    std::array<double, 5> state{};
    int action = 0;
    double reward = 0.0;
    std::array<double, 5> next_state{};
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return ring_[i]; }

    // Uniform sample without replacement within one batch.
    std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> ring_;
    std::size_t next_ = 0;
};

} // namespace qcl
