#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcl/optim.hpp"
#include "qcl/pca.hpp"
#include "qcl/rl.hpp"

namespace qcl {

enum class Algorithm { sgd, ga, ql, dqn, ppo };

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);

// Wall-clock timing is off by default: the ms column would differ
// between runs and break byte-identical reproduction.
enum class TimingMode { none, wall };

struct ExperimentSpec {
    Algorithm algorithm = Algorithm::ga;
    int n_params = 2;
    int runs = 1000;
    std::uint64_t base_seed = 0; // run i uses base_seed + i
    double T = kDefaultTotalTime;
    std::string loadings_path; // empty: no PCA projection
    std::string output_path;   // empty: records only, no CSV
    int jobs = 0;              // 0: hardware concurrency
    TimingMode timing = TimingMode::none;

    // Per-algorithm settings; the run seed overrides the seed field of
    // whichever config the algorithm uses.
    SgdConfig sgd;
    GaConfig ga;
    QlConfig ql;
    DqnConfig dqn;
    PpoConfig ppo;
};

struct RunRecord {
    int run = 0;
    std::uint64_t seed = 0;
    // Shorter than n_params when an agent solved the task mid-episode;
    // the per-segment duration is T / n_params regardless.
    std::vector<double> amplitudes;
    double fidelity = 0.0;
    int iterations = 0;
    bool converged = false;
    double ms = 0.0;
    std::optional<std::array<double, 2>> pca_xy;
};

// Executes spec.runs independent optimizations on a worker pool, projects
// full-length results through the persisted loadings when given, writes
// the CSV when output_path is set, and returns records sorted by run
// index. Deterministic for a fixed spec.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

// Equal-width bins over [0,1]; fidelity 1.0 lands in the last bin.
std::vector<std::size_t>
fidelity_histogram(const std::vector<RunRecord>& records, int bins);

std::string results_csv(const ExperimentSpec& spec,
                        const std::vector<RunRecord>& records);
void write_results_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<RunRecord>& records);

struct ResultsFile {
    std::vector<RunRecord> records;
    int n_params = 0;
    // Parsed from the embedded config comment; 0 when absent.
    double T = 0.0;
    std::string algorithm;
};

// Reads a results CSV and, when the file carries its producing config,
// cross-checks each stored fidelity against a recomputation from the
// stored amplitudes (tolerance 1e-12).
ResultsFile read_results_csv(const std::string& path);

} // namespace qcl
