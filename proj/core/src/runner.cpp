#include "qcl/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include "qcl/csvio.hpp"
#include "qcl/errors.hpp"
#include "qcl/jsonio.hpp"

namespace qcl {

std::string algorithm_name(Algorithm a) {
    switch (a) {
    case Algorithm::sgd:
        return "sgd";
    case Algorithm::ga:
        return "ga";
    case Algorithm::ql:
        return "ql";
    case Algorithm::dqn:
        return "dqn";
    case Algorithm::ppo:
        return "ppo";
    }
    throw contract_error("algorithm_name: unknown algorithm value");
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    if (name == "sgd")
        return Algorithm::sgd;
    if (name == "ga")
        return Algorithm::ga;
    if (name == "ql")
        return Algorithm::ql;
    if (name == "dqn")
        return Algorithm::dqn;
    if (name == "ppo")
        return Algorithm::ppo;
    return std::nullopt;
}

namespace {

OptimResult run_single(const ExperimentSpec& spec, std::uint64_t seed) {
    switch (spec.algorithm) {
    case Algorithm::sgd: {
        SgdConfig cfg = spec.sgd;
        cfg.seed = seed;
        return sgd_optimize(spec.n_params, spec.T, cfg);
    }
    case Algorithm::ga: {
        GaConfig cfg = spec.ga;
        cfg.seed = seed;
        return ga_optimize(spec.n_params, spec.T, cfg);
    }
    case Algorithm::ql: {
        QlConfig cfg = spec.ql;
        cfg.seed = seed;
        ControlEnv env(spec.n_params, spec.T, RewardSchedule::tabular());
        return ql_train(env, cfg);
    }
    case Algorithm::dqn: {
        DqnConfig cfg = spec.dqn;
        cfg.seed = seed;
        ControlEnv env(spec.n_params, spec.T, RewardSchedule::deep());
        return dqn_train(env, cfg);
    }
    case Algorithm::ppo: {
        PpoConfig cfg = spec.ppo;
        cfg.seed = seed;
        ControlEnv env(spec.n_params, spec.T, RewardSchedule::deep());
        return ppo_train(env, cfg);
    }
    }
    throw contract_error("run_experiment: unknown algorithm value");
}

std::string kv(const std::string& key, const std::string& value) {
    return " " + key + "=" + value;
}

std::string kv(const std::string& key, double value) {
    return kv(key, fmt_double(value));
}

std::string kv(const std::string& key, long long value) {
    return kv(key, std::to_string(value));
}

std::string config_comment(const ExperimentSpec& spec) {
    std::string line = "#";
    line += kv("algorithm", algorithm_name(spec.algorithm));
    line += kv("n_params", static_cast<long long>(spec.n_params));
    line += kv("runs", static_cast<long long>(spec.runs));
    line += kv("base_seed", std::to_string(spec.base_seed));
    line += kv("T", spec.T);
    switch (spec.algorithm) {
    case Algorithm::sgd:
        line += kv("learning_rate", spec.sgd.learning_rate);
        line += kv("momentum", spec.sgd.momentum);
        line += kv("max_iterations",
                   static_cast<long long>(spec.sgd.max_iterations));
        line += kv("fd_step", spec.sgd.fd_step);
        line += kv("target_infidelity", spec.sgd.target_infidelity);
        break;
    case Algorithm::ga:
        line += kv("population_size",
                   static_cast<long long>(spec.ga.population_size));
        line += kv("mutation_rate", spec.ga.mutation_rate);
        line += kv("elite_fraction", spec.ga.elite_fraction);
        line += kv("underdog_fraction", spec.ga.underdog_fraction);
        line += kv("max_generations",
                   static_cast<long long>(spec.ga.max_generations));
        line += kv("target_infidelity", spec.ga.target_infidelity);
        line += kv("gene_count",
                   static_cast<long long>(spec.ga.gene_values.size()));
        break;
    case Algorithm::ql:
        line += kv("learning_rate", spec.ql.learning_rate);
        line += kv("discount", spec.ql.discount);
        line += kv("epsilon", spec.ql.epsilon);
        line += kv("max_episodes",
                   static_cast<long long>(spec.ql.max_episodes));
        line += kv("theta_bins", static_cast<long long>(spec.ql.theta_bins));
        line += kv("phi_bins", static_cast<long long>(spec.ql.phi_bins));
        break;
    case Algorithm::dqn:
        line += kv("learning_rate", spec.dqn.learning_rate);
        line += kv("discount", spec.dqn.discount);
        line += kv("exploration_fraction", spec.dqn.exploration_fraction);
        line += kv("epsilon_start", spec.dqn.epsilon_start);
        line += kv("epsilon_end", spec.dqn.epsilon_end);
        line += kv("buffer_capacity",
                   static_cast<long long>(spec.dqn.buffer_capacity));
        line += kv("batch_size", static_cast<long long>(spec.dqn.batch_size));
        line += kv("target_update_every",
                   static_cast<long long>(spec.dqn.target_update_every));
        line += kv("train_every",
                   static_cast<long long>(spec.dqn.train_every));
        line += kv("budget_steps", spec.dqn.budget_steps);
        break;
    case Algorithm::ppo:
        line += kv("learning_rate", spec.ppo.learning_rate);
        line += kv("discount", spec.ppo.discount);
        line += kv("clip", spec.ppo.clip);
        line += kv("entropy_coef", spec.ppo.entropy_coef);
        line += kv("value_coef", spec.ppo.value_coef);
        line += kv("rollout_steps",
                   static_cast<long long>(spec.ppo.rollout_steps));
        line += kv("epochs", static_cast<long long>(spec.ppo.epochs));
        line += kv("minibatch_size",
                   static_cast<long long>(spec.ppo.minibatch_size));
        line += kv("budget_steps", spec.ppo.budget_steps);
        break;
    }
    return line;
}

} // namespace

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
    if (spec.n_params < 1)
        throw invalid_argument("ExperimentSpec: n_params must be >= 1");
    if (spec.runs < 0)
        throw invalid_argument("ExperimentSpec: runs must be >= 0");
    if (!(spec.T > 0.0) || !std::isfinite(spec.T))
        throw invalid_argument("ExperimentSpec: T must be positive");
    if (spec.jobs < 0)
        throw invalid_argument("ExperimentSpec: jobs must be >= 0");

    std::optional<PcaModel> model;
    if (!spec.loadings_path.empty()) {
        model = pca_load(spec.loadings_path);
        if (model->n_params() != spec.n_params)
            throw invalid_argument(
                "run_experiment: loadings dimension does not match n_params");
    }

    std::vector<RunRecord> records(static_cast<std::size_t>(spec.runs));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&spec, &model, &records, &next, &failure,
                   &failure_mutex]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= spec.runs)
                return;
            try {
                RunRecord rec;
                rec.run = i;
                rec.seed = spec.base_seed + static_cast<std::uint64_t>(i);
                const auto t0 = std::chrono::steady_clock::now();
                OptimResult result = run_single(spec, rec.seed);
                if (spec.timing == TimingMode::wall)
                    rec.ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
                rec.amplitudes = std::move(result.best_pulse.amplitudes);
                rec.fidelity = result.best_fidelity;
                rec.iterations = result.iterations_used;
                rec.converged = result.converged;
                if (model) {
                    // A pulse truncated by an early solve leaves the control
                    // off for the remaining segments, so it projects as the
                    // zero-padded amplitude vector.
                    std::vector<double> embedded = rec.amplitudes;
                    embedded.resize(static_cast<std::size_t>(spec.n_params),
                                    0.0);
                    rec.pca_xy = pca_transform(*model, embedded);
                }
                records[static_cast<std::size_t>(i)] = std::move(rec);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };

    int jobs = spec.jobs;
    if (jobs == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        jobs = hw > 0 ? static_cast<int>(hw) : 1;
    }
    jobs = std::clamp(jobs, 1, std::max(spec.runs, 1));

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    if (!spec.output_path.empty())
        write_results_csv(spec.output_path, spec, records);
    return records;
}

std::vector<std::size_t>
fidelity_histogram(const std::vector<RunRecord>& records, int bins) {
    if (bins < 1)
        throw invalid_argument("fidelity_histogram: bins must be >= 1");
    std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
    for (const RunRecord& rec : records) {
        if (!(rec.fidelity >= 0.0) || !(rec.fidelity <= 1.0))
            throw invalid_argument(
                "fidelity_histogram: fidelity outside [0, 1]");
        const int b = std::min(static_cast<int>(rec.fidelity *
                                                static_cast<double>(bins)),
                               bins - 1);
        ++hist[static_cast<std::size_t>(b)];
    }
    return hist;
}

std::string results_csv(const ExperimentSpec& spec,
                        const std::vector<RunRecord>& records) {
    const std::size_t n = static_cast<std::size_t>(spec.n_params);
    std::string out = config_comment(spec);
    out += "\n";
    out += "run,seed";
    for (std::size_t k = 1; k <= n; ++k)
        out += ",a" + std::to_string(k);
    out += ",fidelity,pc1,pc2,iters,converged,ms\n";

    for (const RunRecord& rec : records) {
        if (rec.amplitudes.size() > n)
            throw invalid_argument(
                "results_csv: record has more amplitudes than n_params");
        out += std::to_string(rec.run);
        out += ",";
        out += std::to_string(rec.seed);
        for (std::size_t k = 0; k < n; ++k) {
            out += ",";
            if (k < rec.amplitudes.size())
                out += fmt_double(rec.amplitudes[k]);
        }
        out += ",";
        out += fmt_double(rec.fidelity);
        out += ",";
        if (rec.pca_xy) {
            out += fmt_double((*rec.pca_xy)[0]);
            out += ",";
            out += fmt_double((*rec.pca_xy)[1]);
        } else {
            out += ",";
        }
        out += ",";
        out += std::to_string(rec.iterations);
        out += ",";
        out += rec.converged ? "1" : "0";
        out += ",";
        out += fmt_double(rec.ms);
        out += "\n";
    }
    return out;
}

void write_results_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<RunRecord>& records) {
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw schema_error("cannot open for writing: " + path);
    file << results_csv(spec, records);
    if (!file)
        throw schema_error("write failed: " + path);
}

namespace {

std::uint64_t parse_u64_cell(const std::string& cell,
                             const std::string& context) {
    if (cell.empty())
        throw schema_error(context + ": empty cell");
    errno = 0;
    char* end = nullptr;
    const unsigned long long value = std::strtoull(cell.c_str(), &end, 10);
    if (end != cell.c_str() + cell.size() || errno == ERANGE ||
        cell.front() == '-')
        throw schema_error(context + ": not an unsigned integer: " + cell);
    return static_cast<std::uint64_t>(value);
}

// key=value tokens from the embedded config comments.
std::optional<std::string> comment_value(const CsvTable& table,
                                         const std::string& key) {
    for (const std::string& comment : table.comments) {
        std::size_t pos = 0;
        while (pos < comment.size()) {
            std::size_t end = comment.find(' ', pos);
            if (end == std::string::npos)
                end = comment.size();
            const std::string token = comment.substr(pos, end - pos);
            const std::size_t eq = token.find('=');
            if (eq != std::string::npos && token.substr(0, eq) == key)
                return token.substr(eq + 1);
            pos = end + 1;
        }
    }
    return std::nullopt;
}

} // namespace

ResultsFile read_results_csv(const std::string& path) {
    const CsvTable table = read_csv(path);

    const auto& cols = table.columns;
    std::size_t at = 0;
    auto expect = [&](const std::string& name) {
        if (at >= cols.size() || cols[at] != name)
            throw schema_error(path + ": expected column '" + name +
                               "' at position " + std::to_string(at + 1));
        ++at;
    };
    expect("run");
    expect("seed");
    int n_params = 0;
    while (at < cols.size() &&
           cols[at] == "a" + std::to_string(n_params + 1)) {
        ++n_params;
        ++at;
    }
    if (n_params == 0)
        throw schema_error(path + ": no amplitude columns (a1, a2, ...)");
    expect("fidelity");
    expect("pc1");
    expect("pc2");
    expect("iters");
    expect("converged");
    expect("ms");
    if (at != cols.size())
        throw schema_error(path + ": unexpected extra column '" + cols[at] +
                           "'");

    ResultsFile file;
    file.n_params = n_params;
    if (const auto t = comment_value(table, "T"))
        file.T = parse_double_cell(*t, path + ": config T");
    if (const auto algo = comment_value(table, "algorithm"))
        file.algorithm = *algo;

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = path + ": row " + std::to_string(r + 1);
        auto cell = [&row](std::size_t idx) -> std::string {
            return idx < row.size() ? row[idx] : std::string();
        };

        RunRecord rec;
        rec.run = static_cast<int>(
            parse_int_cell(cell(0), where + ", column run"));
        rec.seed = parse_u64_cell(cell(1), where + ", column seed");

        bool truncated = false;
        for (int k = 0; k < n_params; ++k) {
            const std::string value = cell(2 + static_cast<std::size_t>(k));
            if (value.empty()) {
                truncated = true;
                continue;
            }
            if (truncated)
                throw schema_error(where +
                                   ": amplitude after an empty cell");
            rec.amplitudes.push_back(
                parse_double_cell(value, where + ", column a" +
                                             std::to_string(k + 1)));
        }

        const std::size_t base = 2 + static_cast<std::size_t>(n_params);
        rec.fidelity =
            parse_double_cell(cell(base), where + ", column fidelity");
        const std::string pc1 = cell(base + 1);
        const std::string pc2 = cell(base + 2);
        if (pc1.empty() != pc2.empty())
            throw schema_error(where + ": pc1 and pc2 must be set together");
        if (!pc1.empty())
            rec.pca_xy = {parse_double_cell(pc1, where + ", column pc1"),
                          parse_double_cell(pc2, where + ", column pc2")};
        rec.iterations = static_cast<int>(
            parse_int_cell(cell(base + 3), where + ", column iters"));
        const long long conv =
            parse_int_cell(cell(base + 4), where + ", column converged");
        if (conv != 0 && conv != 1)
            throw schema_error(where + ": converged flag must be 0 or 1");
        rec.converged = conv == 1;
        const std::string ms = cell(base + 5);
        rec.ms = ms.empty() ? 0.0
                            : parse_double_cell(ms, where + ", column ms");

        if (file.T > 0.0 && !rec.amplitudes.empty()) {
            ControlPulse pulse;
            pulse.amplitudes = rec.amplitudes;
            pulse.total_time =
                file.T * static_cast<double>(rec.amplitudes.size()) /
                static_cast<double>(n_params);
            const double recomputed = pulse_fidelity(pulse);
            if (std::abs(recomputed - rec.fidelity) > 1e-12)
                throw schema_error(
                    where + ": stored fidelity " + fmt_double(rec.fidelity) +
                    " disagrees with the recomputed value " +
                    fmt_double(recomputed));
        }
        file.records.push_back(std::move(rec));
    }
    return file;
}

} // namespace qcl
