#pragma once

#include <cstdint>
#include <vector>

#include "qcl/qdyn.hpp"

namespace qcl {

struct SgdConfig {
    double learning_rate = 0.01;
    double momentum = 0.95;
    int max_iterations = 10000;
    double fd_step = 1e-3; // central-difference half-step
    double target_infidelity = 1e-3;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

// The 100-value amplitude alphabet shared by the genetic algorithm and
// the episodic environment.
std::vector<double> default_gene_values();

struct GaConfig {
    int population_size = 100;
    std::vector<double> gene_values = default_gene_values();
    double mutation_rate = 0.3;
    double elite_fraction = 0.30;
    double underdog_fraction = 0.20;
    int max_generations = 50;
    double target_infidelity = 1e-3;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

struct OptimResult {
    ControlPulse best_pulse;
    double best_fidelity = 0.0;
    // Unit depends on the producer: gradient iterations for SGD,
    // generations for GA, episodes for tabular Q-learning, environment
    // steps for the network agents.
    int iterations_used = 0;
    bool converged = false;
    std::vector<double> trace; // per-iteration fidelity when requested
};

// Gradient ascent on pulse fidelity with momentum. Starts uniformly at
// random in [-1,1]^n, estimates the gradient by componentwise central
// differences, clamps every iterate to [-1,1], and returns the final
// iterate unless the infidelity target is hit first.
OptimResult sgd_optimize(int n_params, double T, const SgdConfig& cfg);

// Genetic search over chromosomes of gene_values entries. Survivors are
// the top elite_fraction plus the bottom underdog_fraction of each
// generation; the rest is refilled by single-point crossover of two
// uniformly drawn survivors followed by per-gene mutation.
OptimResult ga_optimize(int n_params, double T, const GaConfig& cfg);

} // namespace qcl
