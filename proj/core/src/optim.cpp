#include "qcl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qcl/errors.hpp"
#include "qcl/rng.hpp"

namespace qcl {

std::vector<double> default_gene_values() { return linspace(-1.0, 1.0, 100); }

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

void validate_common(int n_params, double T) {
    if (n_params < 1)
        throw invalid_argument("optimize: n_params must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T))
        throw invalid_argument("optimize: T must be positive");
}

void validate(const SgdConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw invalid_argument("SgdConfig: learning_rate must be positive");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        throw invalid_argument("SgdConfig: momentum must lie in [0,1)");
    if (cfg.max_iterations < 1)
        throw invalid_argument("SgdConfig: max_iterations must be >= 1");
    if (!(cfg.fd_step > 0.0))
        throw invalid_argument("SgdConfig: fd_step must be positive");
    if (!(cfg.target_infidelity > 0.0))
        throw invalid_argument("SgdConfig: target_infidelity must be positive");
}

void validate(const GaConfig& cfg) {
    if (cfg.population_size < 2 || cfg.population_size % 2 != 0)
        throw invalid_argument("GaConfig: population_size must be even and >= 2");
    if (cfg.gene_values.empty())
        throw invalid_argument("GaConfig: gene_values must not be empty");
    if (!std::is_sorted(cfg.gene_values.begin(), cfg.gene_values.end()))
        throw invalid_argument("GaConfig: gene_values must be sorted");
    if (cfg.gene_values.front() < -1.0 || cfg.gene_values.back() > 1.0)
        throw invalid_argument("GaConfig: gene_values must lie in [-1,1]");
    if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
        throw invalid_argument("GaConfig: mutation_rate must lie in [0,1]");
    if (cfg.elite_fraction < 0.0 || cfg.underdog_fraction < 0.0 ||
        cfg.elite_fraction + cfg.underdog_fraction > 1.0)
        throw invalid_argument("GaConfig: selection fractions must be "
                               "non-negative and sum to at most 1");
    if (cfg.max_generations < 1)
        throw invalid_argument("GaConfig: max_generations must be >= 1");
    if (!(cfg.target_infidelity > 0.0))
        throw invalid_argument("GaConfig: target_infidelity must be positive");
}

} // namespace

OptimResult sgd_optimize(int n_params, double T, const SgdConfig& cfg) {
    validate_common(n_params, T);
    validate(cfg);

    Rng rng(cfg.seed);
    ControlPulse pulse;
    pulse.total_time = T;
    pulse.amplitudes.resize(static_cast<std::size_t>(n_params));
    for (double& a : pulse.amplitudes)
        a = rng.uniform(-1.0, 1.0);

    std::vector<double> velocity(static_cast<std::size_t>(n_params), 0.0);
    ControlPulse probe = pulse;

    OptimResult result;
    double f = pulse_fidelity(pulse);
    const double h = cfg.fd_step;

    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (1.0 - f <= cfg.target_infidelity) {
            result.iterations_used = it;
            break;
        }
        for (std::size_t k = 0; k < pulse.amplitudes.size(); ++k) {
            const double a = pulse.amplitudes[k];
            probe.amplitudes = pulse.amplitudes;
            probe.amplitudes[k] = a + h;
            const double fp = pulse_fidelity(probe);
            probe.amplitudes[k] = a - h;
            const double fm = pulse_fidelity(probe);
            const double g = (fp - fm) / (2.0 * h);
            velocity[k] = cfg.momentum * velocity[k] + cfg.learning_rate * g;
        }
        for (std::size_t k = 0; k < pulse.amplitudes.size(); ++k)
            pulse.amplitudes[k] = clamp_unit(pulse.amplitudes[k] + velocity[k]);
        f = pulse_fidelity(pulse);
        result.iterations_used = it + 1;
        if (cfg.record_trace)
            result.trace.push_back(f);
    }

    result.best_pulse = pulse;
    result.best_fidelity = f;
    result.converged = (1.0 - f) <= cfg.target_infidelity;
    return result;
}

OptimResult ga_optimize(int n_params, double T, const GaConfig& cfg) {
    validate_common(n_params, T);
    validate(cfg);

    Rng rng(cfg.seed);
    const std::size_t pop_n = static_cast<std::size_t>(cfg.population_size);
    const std::size_t n = static_cast<std::size_t>(n_params);
    const std::size_t n_genes = cfg.gene_values.size();

    auto random_gene = [&]() {
        return cfg.gene_values[rng.uniform_int(n_genes)];
    };

    std::vector<std::vector<double>> population(pop_n);
    for (auto& chrom : population) {
        chrom.resize(n);
        for (double& gene : chrom)
            gene = random_gene();
    }

    ControlPulse eval_pulse;
    eval_pulse.total_time = T;
    std::vector<double> fitness(pop_n);
    auto evaluate = [&](const std::vector<std::vector<double>>& pop) {
        for (std::size_t i = 0; i < pop.size(); ++i) {
            eval_pulse.amplitudes = pop[i];
            fitness[i] = pulse_fidelity(eval_pulse);
        }
    };

    // Ranking: fitness descending, insertion index as the tiebreak.
    std::vector<std::size_t> order(pop_n);
    auto rank = [&]() {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return fitness[a] > fitness[b];
                         });
    };

    OptimResult result;
    std::vector<double> best_chrom;
    double best_f = -1.0;
    auto note_best = [&]() {
        const std::size_t top = order.front();
        if (fitness[top] > best_f) {
            best_f = fitness[top];
            best_chrom = population[top];
        }
        if (cfg.record_trace)
            result.trace.push_back(best_f);
    };

    evaluate(population);
    rank();
    note_best();

    const std::size_t elite_n = static_cast<std::size_t>(
        std::lround(cfg.elite_fraction * static_cast<double>(pop_n)));
    std::size_t under_n = static_cast<std::size_t>(
        std::lround(cfg.underdog_fraction * static_cast<double>(pop_n)));
    if (elite_n + under_n > pop_n)
        under_n = pop_n - elite_n; // rounding can overshoot by one
    if (elite_n + under_n == 0)
        throw invalid_argument(
            "GaConfig: selection fractions leave no survivors to breed from");

    int generations = 0;
    while (1.0 - best_f > cfg.target_infidelity &&
           generations < cfg.max_generations) {
        std::vector<std::vector<double>> survivors;
        survivors.reserve(elite_n + under_n);
        for (std::size_t i = 0; i < elite_n; ++i)
            survivors.push_back(population[order[i]]);
        for (std::size_t i = 0; i < under_n; ++i)
            survivors.push_back(population[order[pop_n - under_n + i]]);

        std::vector<std::vector<double>> next = survivors;
        while (next.size() < pop_n) {
            const auto& pa = survivors[rng.uniform_int(survivors.size())];
            const auto& pb = survivors[rng.uniform_int(survivors.size())];
            std::vector<double> child = pa;
            if (n > 1) {
                const std::size_t cut = 1 + rng.uniform_int(n - 1);
                for (std::size_t k = cut; k < n; ++k)
                    child[k] = pb[k];
            }
            for (double& gene : child)
                if (rng.uniform01() < cfg.mutation_rate)
                    gene = random_gene();
            next.push_back(std::move(child));
        }

        population = std::move(next);
        evaluate(population);
        rank();
        note_best();
        ++generations;
    }

    result.best_pulse.amplitudes = best_chrom;
    result.best_pulse.total_time = T;
    result.best_fidelity = best_f;
    result.iterations_used = generations;
    result.converged = (1.0 - best_f) <= cfg.target_infidelity;
    return result;
}

} // namespace qcl
