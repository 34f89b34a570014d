#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "qcl/analysis.hpp"
#include "qcl/csvio.hpp"
#include "qcl/errors.hpp"
#include "qcl/jsonio.hpp"
#include "qcl/landscape.hpp"
#include "qcl/pca.hpp"
#include "qcl/qdyn.hpp"
#include "qcl/runner.hpp"
#include "qcl/svg.hpp"

namespace {

struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim_ws(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Expands a plain `key = value` config file into long-option arguments,
// skipping keys already present on the command line so explicit flags
// always win. Later lines override earlier ones for the same key.
std::vector<std::string>
config_file_args(const std::string& path,
                 const std::vector<std::string>& given) {
    std::ifstream in(path);
    if (!in)
        throw qcl::schema_error("cannot open config file " + path);

    std::set<std::string> present;
    for (const std::string& arg : given)
        if (arg.rfind("--", 0) == 0)
            present.insert(arg.substr(0, arg.find('=')));

    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string text = trim_ws(line);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        const std::string where = path + ":" + std::to_string(line_no);
        if (eq == std::string::npos)
            throw qcl::schema_error(where + ": expected key = value");
        const std::string key = trim_ws(text.substr(0, eq));
        const std::string value = trim_ws(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw qcl::schema_error(where + ": expected key = value");
        bool replaced = false;
        for (auto& entry : entries)
            if (entry.first == key) {
                entry.second = value;
                replaced = true;
                break;
            }
        if (!replaced)
            entries.emplace_back(key, value);
    }

    std::vector<std::string> extra;
    for (const auto& [key, value] : entries) {
        if (present.count("--" + key) != 0)
            continue;
        extra.push_back("--" + key);
        extra.push_back(value);
    }
    return extra;
}

// Empty path means stdout.
void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw qcl::schema_error("cannot open for writing: " + path);
    file << text;
    if (!file)
        throw qcl::schema_error("write failed: " + path);
}

std::string kv(const std::string& key, const std::string& value) {
    return " " + key + "=" + value;
}

std::string kv(const std::string& key, double value) {
    return kv(key, qcl::fmt_double(value));
}

std::string kv(const std::string& key, long long value) {
    return kv(key, std::to_string(value));
}

// Indices of the a1..aN columns; they must be present and contiguous in
// numbering, though not necessarily in position.
std::vector<int> amplitude_columns(const qcl::CsvTable& table,
                                   const std::string& path) {
    std::vector<int> cols;
    for (int k = 1;; ++k) {
        const int idx = table.column("a" + std::to_string(k));
        if (idx < 0)
            break;
        cols.push_back(idx);
    }
    if (cols.empty())
        throw qcl::schema_error(path +
                                ": no amplitude columns (a1, a2, ...)");
    return cols;
}

void run_bruteforce(int n_params, int grid, double T,
                    const std::string& out) {
    qcl::GridSpec spec;
    spec.n_params = n_params;
    spec.points_per_axis = grid > 0 ? grid : (n_params == 4 ? 30 : 100);

    std::ofstream file;
    std::ostream* sink = &std::cout;
    if (!out.empty()) {
        file.open(out, std::ios::binary);
        if (!file)
            throw qcl::schema_error("cannot open for writing: " + out);
        sink = &file;
    }

    std::string header = "#";
    header += kv("n_params", static_cast<long long>(spec.n_params));
    header += kv("grid", static_cast<long long>(spec.points_per_axis));
    header += kv("lo", spec.lo);
    header += kv("hi", spec.hi);
    header += kv("T", T);
    header += "\n";
    for (int k = 1; k <= spec.n_params; ++k) {
        header += k == 1 ? "a" : ",a";
        header += std::to_string(k);
    }
    header += ",fidelity\n";
    *sink << header;

    long long count = 0;
    long long above = 0;
    double max_f = 0.0;
    std::string row;
    qcl::generate_grid(spec, T, [&](const qcl::LandscapePoint& p) {
        row.clear();
        for (double a : p.amplitudes) {
            if (!row.empty())
                row += ',';
            row += qcl::fmt_double(a);
        }
        row += ',';
        row += qcl::fmt_double(p.fidelity);
        row += '\n';
        *sink << row;
        ++count;
        if (p.fidelity > 0.95)
            ++above;
        max_f = std::max(max_f, p.fidelity);
    });
    if (!*sink)
        throw qcl::schema_error("write failed while streaming the grid");

    std::string summary;
    summary += "points=" + std::to_string(count);
    summary += kv("max_fidelity", max_f);
    summary += kv("fraction_above_0.95",
                  count > 0 ? static_cast<double>(above) /
                                  static_cast<double>(count)
                            : 0.0);
    summary += "\n";
    (out.empty() ? std::cerr : std::cout) << summary;
}

void run_pca_fit(const std::string& input, const std::string& out) {
    const qcl::CsvTable table = qcl::read_csv(input);
    const std::vector<int> cols = amplitude_columns(table, input);
    const int n = static_cast<int>(cols.size());

    std::vector<double> flat;
    flat.reserve(table.rows.size() * cols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        bool complete = true;
        for (int idx : cols) {
            const std::size_t i = static_cast<std::size_t>(idx);
            if (i >= row.size() || row[i].empty()) {
                complete = false;
                break;
            }
        }
        if (!complete)
            continue; // truncated run, no full-length vector to fit on
        for (int idx : cols)
            flat.push_back(qcl::parse_double_cell(
                row[static_cast<std::size_t>(idx)],
                input + ": row " + std::to_string(r + 1)));
    }

    const qcl::PcaModel model = qcl::pca_fit_flat(flat, n);
    if (out.empty())
        std::cout << qcl::pca_to_json(model);
    else
        qcl::pca_save(model, out);
}

void run_pca_transform(const std::string& model_path,
                       const std::string& input, const std::string& out) {
    const qcl::PcaModel model = qcl::pca_load(model_path);
    qcl::CsvTable table = qcl::read_csv(input);
    const std::vector<int> cols = amplitude_columns(table, input);
    if (static_cast<int>(cols.size()) != model.n_params())
        throw qcl::invalid_argument(
            "pca-transform: input has " + std::to_string(cols.size()) +
            " amplitude columns but the model was fit on " +
            std::to_string(model.n_params()));

    int pc1 = table.column("pc1");
    int pc2 = table.column("pc2");
    if ((pc1 < 0) != (pc2 < 0))
        throw qcl::schema_error(input +
                                ": pc1 and pc2 must both exist or neither");
    if (pc1 < 0) {
        pc1 = static_cast<int>(table.columns.size());
        table.columns.push_back("pc1");
        pc2 = static_cast<int>(table.columns.size());
        table.columns.push_back("pc2");
    }

    std::string text;
    for (const std::string& comment : table.comments)
        text += comment + "\n";
    text += "#";
    text += kv("pca_transform_model", model_path);
    text += kv("input", input);
    text += "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0)
            text += ',';
        text += table.columns[c];
    }
    text += "\n";

    std::vector<double> point(cols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        auto& row = table.rows[r];
        row.resize(table.columns.size());
        bool complete = true;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto& cell = row[static_cast<std::size_t>(cols[k])];
            if (cell.empty()) {
                complete = false;
                break;
            }
            point[k] = qcl::parse_double_cell(
                cell, input + ": row " + std::to_string(r + 1));
        }
        if (complete) {
            const auto xy = qcl::pca_transform(model, point);
            row[static_cast<std::size_t>(pc1)] = qcl::fmt_double(xy[0]);
            row[static_cast<std::size_t>(pc2)] = qcl::fmt_double(xy[1]);
        } else {
            row[static_cast<std::size_t>(pc1)].clear();
            row[static_cast<std::size_t>(pc2)].clear();
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0)
                text += ',';
            text += row[c];
        }
        text += "\n";
    }
    write_text(out, text);
}

void run_analyze(const std::string& input, double eps, int min_pts,
                 double fidelity_min, double eps_xy, double eps_f,
                 const std::string& out, std::string overlap_out) {
    if (fidelity_min < 0.0 || fidelity_min > 1.0)
        throw qcl::invalid_argument(
            "analyze: --fidelity-min must be in [0, 1]");

    const qcl::CsvTable table = qcl::read_csv(input);
    const int c_pc1 = table.column("pc1");
    const int c_pc2 = table.column("pc2");
    const int c_f = table.column("fidelity");
    if (c_pc1 < 0 || c_pc2 < 0)
        throw qcl::schema_error(input + ": pc1/pc2 columns are required");
    if (c_f < 0)
        throw qcl::schema_error(input + ": fidelity column is required");

    std::vector<std::array<double, 2>> xy;
    std::vector<std::array<double, 3>> xyf;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = input + ": row " + std::to_string(r + 1);
        auto cell = [&row](int idx) -> std::string {
            const std::size_t i = static_cast<std::size_t>(idx);
            return i < row.size() ? row[i] : std::string();
        };
        const std::string s1 = cell(c_pc1);
        const std::string s2 = cell(c_pc2);
        const std::string sf = cell(c_f);
        if (s1.empty() || s2.empty() || sf.empty())
            continue; // row was written without loadings, never projected
        const double f = qcl::parse_double_cell(sf, where + " fidelity");
        if (!(f > fidelity_min))
            continue;
        const double x = qcl::parse_double_cell(s1, where + " pc1");
        const double y = qcl::parse_double_cell(s2, where + " pc2");
        xy.push_back({x, y});
        xyf.push_back({x, y, f});
    }

    const qcl::ClusterReport report =
        qcl::cluster_density_index(xy, eps, min_pts);

    std::vector<std::size_t> sizes(
        static_cast<std::size_t>(report.n_clusters), 0);
    for (int label : report.labels)
        if (label >= 0)
            ++sizes[static_cast<std::size_t>(label)];
    bool any_pair = false;
    for (std::size_t s : sizes)
        any_pair = any_pair || s >= 2;

    qcl::JsonWriter w;
    w.begin_object();
    w.key("eps");
    w.value(report.eps);
    w.key("min_pts");
    w.value(report.min_pts);
    w.key("n_clusters");
    w.value(report.n_clusters);
    w.key("areas");
    w.value(report.areas);
    w.key("d_bar");
    if (report.has_clusters && any_pair)
        w.value(report.d_bar);
    else
        w.null();
    w.key("l_bar");
    if (report.n_clusters >= 2)
        w.value(report.l_bar);
    else
        w.null();
    w.key("a_bar");
    if (report.has_clusters)
        w.value(report.a_bar);
    else
        w.null();
    w.key("cdi");
    if (report.cdi_defined)
        w.value(report.cdi);
    else
        w.null();
    w.key("params");
    w.begin_object();
    w.key("input");
    w.value(input);
    w.key("fidelity_min");
    w.value(fidelity_min);
    w.key("eps_xy");
    w.value(eps_xy);
    w.key("eps_f");
    w.value(eps_f);
    w.end_object();
    w.end_object();
    write_text(out, w.str() + "\n");

    if (overlap_out.empty() && !out.empty()) {
        overlap_out = out;
        const std::string suffix = ".json";
        if (overlap_out.size() > suffix.size() &&
            overlap_out.compare(overlap_out.size() - suffix.size(),
                                suffix.size(), suffix) == 0)
            overlap_out.resize(overlap_out.size() - suffix.size());
        overlap_out += "_overlap.csv";
    }
    if (!overlap_out.empty()) {
        const auto groups =
            qcl::overlap_counts(xyf, qcl::OverlapSpec{eps_xy, eps_f});
        std::string text = "#";
        text += kv("input", input);
        text += kv("fidelity_min", fidelity_min);
        text += kv("eps_xy", eps_xy);
        text += kv("eps_f", eps_f);
        text += "\nx,y,count\n";
        for (const auto& g : groups) {
            text += qcl::fmt_double(g.x);
            text += ',';
            text += qcl::fmt_double(g.y);
            text += ',';
            text += std::to_string(g.count);
            text += '\n';
        }
        write_text(overlap_out, text);
    }
}

void run_plot(const std::string& input, const std::string& out,
              const std::optional<double>& filter, double marker_radius) {
    if (filter && (*filter < 0.0 || *filter > 1.0))
        throw qcl::invalid_argument("plot: --filter must be in [0, 1]");

    const qcl::CsvTable table = qcl::read_csv(input);
    int cx = table.column("pc1");
    int cy = table.column("pc2");
    std::string x_label = "pc1", y_label = "pc2";
    if (cx < 0 || cy < 0) {
        cx = table.column("a1");
        cy = table.column("a2");
        x_label = "a1";
        y_label = "a2";
    }
    if (cx < 0 || cy < 0)
        throw qcl::schema_error(input +
                                ": need pc1/pc2 or a1/a2 columns to plot");
    const int cf = table.column("fidelity");
    if (cf < 0)
        throw qcl::schema_error(input + ": fidelity column is required");

    std::vector<qcl::ScatterPoint> points;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = input + ": row " + std::to_string(r + 1);
        auto cell = [&row](int idx) -> std::string {
            const std::size_t i = static_cast<std::size_t>(idx);
            return i < row.size() ? row[i] : std::string();
        };
        const std::string sx = cell(cx);
        const std::string sy = cell(cy);
        const std::string sf = cell(cf);
        if (sx.empty() || sy.empty() || sf.empty())
            continue;
        qcl::ScatterPoint p;
        p.x = qcl::parse_double_cell(sx, where + " " + x_label);
        p.y = qcl::parse_double_cell(sy, where + " " + y_label);
        p.fidelity = qcl::parse_double_cell(sf, where + " fidelity");
        if (filter && !(p.fidelity > *filter))
            continue;
        points.push_back(p);
    }

    qcl::SvgOptions options;
    options.marker_radius = marker_radius;
    options.x_label = x_label;
    options.y_label = y_label;
    std::string config;
    config += "input=" + input;
    if (filter)
        config += kv("filter", *filter);
    config += kv("marker_radius", marker_radius);
    options.config_comment = config;
    write_text(out, qcl::render_scatter_svg(points, options));
}

void run_speed_limit(double max_time, int scan_points, int segments) {
    const auto t_min =
        qcl::estimate_speed_limit(max_time, scan_points, segments);
    if (!t_min)
        throw NotFound("no pulse duration up to " +
                       qcl::fmt_double(max_time) +
                       " reached fidelity 0.999; raise --max-time");
    std::cout << "T_min=" << qcl::fmt_double(*t_min) << "\n";
    std::cout << "recommended_T=" << qcl::fmt_double(2.0 * *t_min) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-qubit control landscape toolkit"};
    app.require_subcommand(1);
    std::string config_path;

    auto* bf = app.add_subcommand(
        "bruteforce", "Evaluate fidelity on a full amplitude grid");
    int bf_n = 2;
    int bf_grid = 0;
    double bf_time = qcl::kDefaultTotalTime;
    std::string bf_out;
    bf->add_option("--n-params", bf_n, "Number of pulse segments")
        ->check(CLI::Range(1, 8));
    bf->add_option("--grid", bf_grid,
                   "Points per axis (default 100, or 30 for 4 parameters)")
        ->check(CLI::Range(2, 1000000));
    bf->add_option("--time", bf_time, "Total pulse duration");
    bf->add_option("--out", bf_out, "Output CSV path (default stdout)");
    bf->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    bf->callback([&] { run_bruteforce(bf_n, bf_grid, bf_time, bf_out); });

    auto* fit = app.add_subcommand(
        "pca-fit", "Fit a 2-component PCA model on amplitude columns");
    std::string fit_input, fit_out;
    fit->add_option("--input", fit_input, "Input CSV with a1..aN columns")
        ->required();
    fit->add_option("--out", fit_out, "Model JSON path (default stdout)");
    fit->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    fit->callback([&] { run_pca_fit(fit_input, fit_out); });

    auto* tr = app.add_subcommand(
        "pca-transform", "Project amplitude columns through a saved model");
    std::string tr_model, tr_input, tr_out;
    tr->add_option("--model", tr_model, "Model JSON from pca-fit")
        ->required();
    tr->add_option("--input", tr_input, "Input CSV with a1..aN columns")
        ->required();
    tr->add_option("--out", tr_out, "Output CSV path (default stdout)");
    tr->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    tr->callback([&] { run_pca_transform(tr_model, tr_input, tr_out); });

    auto* opt = app.add_subcommand(
        "optimize", "Run repeated optimizations and collect results");
    qcl::ExperimentSpec spec;
    std::string opt_algo;
    std::string opt_timing = "none";
    double o_lr = 0, o_ti = 0, o_momentum = 0, o_fd = 0, o_mut = 0;
    double o_elite = 0, o_under = 0, o_gamma = 0, o_epsilon = 0;
    double o_explore = 0, o_eps_start = 0, o_eps_end = 0, o_clip = 0;
    double o_entropy = 0, o_value = 0;
    int o_maxit = 0, o_pop = 0, o_gens = 0, o_episodes = 0, o_theta = 0;
    int o_phi = 0, o_batch = 0, o_buffer = 0, o_tupdate = 0, o_tevery = 0;
    int o_rollout = 0, o_epochs = 0, o_minibatch = 0;
    long long o_budget = 0;
    opt->add_option("--algo", opt_algo, "sgd, ga, ql, dqn or ppo")
        ->required()
        ->check(CLI::IsMember({"sgd", "ga", "ql", "dqn", "ppo"}));
    opt->add_option("--n-params", spec.n_params, "Number of pulse segments")
        ->check(CLI::Range(1, 64));
    opt->add_option("--runs", spec.runs, "Independent runs")
        ->check(CLI::Range(0, 100000000));
    opt->add_option("--seed", spec.base_seed, "Base seed; run i adds i");
    opt->add_option("--time", spec.T, "Total pulse duration");
    opt->add_option("--loadings", spec.loadings_path,
                    "PCA model JSON for pc1/pc2 projection");
    opt->add_option("--out", spec.output_path,
                    "Results CSV path (default stdout)");
    opt->add_option("--jobs", spec.jobs,
                    "Worker threads (0 = logical cores)")
        ->check(CLI::Range(0, 4096));
    opt->add_option("--timing", opt_timing,
                    "ms column source: none keeps output byte-stable")
        ->check(CLI::IsMember({"none", "wall"}));
    auto* f_lr = opt->add_option("--lr", o_lr, "Learning rate");
    auto* f_ti = opt->add_option("--target-infidelity", o_ti,
                                 "Convergence threshold (sgd, ga)");
    auto* f_momentum = opt->add_option("--momentum", o_momentum, "SGD momentum");
    auto* f_maxit = opt->add_option("--max-iters", o_maxit,
                                    "SGD iteration cap");
    auto* f_fd = opt->add_option("--fd-step", o_fd,
                                 "SGD finite-difference step");
    auto* f_pop = opt->add_option("--population", o_pop, "GA population size");
    auto* f_mut = opt->add_option("--mutation-rate", o_mut,
                                  "GA per-gene mutation probability");
    auto* f_elite = opt->add_option("--elite-fraction", o_elite,
                                    "GA surviving top fraction");
    auto* f_under = opt->add_option("--underdog-fraction", o_under,
                                    "GA surviving bottom fraction");
    auto* f_gens = opt->add_option("--max-generations", o_gens,
                                   "GA generation cap");
    auto* f_gamma = opt->add_option("--gamma", o_gamma,
                                    "Discount factor (ql, dqn, ppo)");
    auto* f_epsilon = opt->add_option("--epsilon", o_epsilon,
                                      "QL exploration probability");
    auto* f_episodes = opt->add_option("--episodes", o_episodes,
                                       "QL episode cap");
    auto* f_theta = opt->add_option("--theta-bins", o_theta,
                                    "QL polar-angle bins");
    auto* f_phi = opt->add_option("--phi-bins", o_phi,
                                  "QL azimuthal-angle bins");
    auto* f_explore = opt->add_option("--exploration-fraction", o_explore,
                                      "DQN fraction of budget for annealing");
    auto* f_eps_start = opt->add_option("--eps-start", o_eps_start,
                                        "DQN initial epsilon");
    auto* f_eps_end = opt->add_option("--eps-end", o_eps_end,
                                      "DQN final epsilon");
    auto* f_buffer = opt->add_option("--buffer", o_buffer,
                                     "DQN replay buffer capacity");
    auto* f_batch = opt->add_option("--batch", o_batch, "DQN batch size");
    auto* f_tupdate = opt->add_option("--target-update", o_tupdate,
                                      "DQN steps between target syncs");
    auto* f_tevery = opt->add_option("--train-every", o_tevery,
                                     "DQN steps between updates");
    auto* f_budget = opt->add_option("--budget", o_budget,
                                     "Environment step budget (dqn, ppo)");
    auto* f_clip = opt->add_option("--clip", o_clip, "PPO clip range");
    auto* f_entropy = opt->add_option("--entropy-coef", o_entropy,
                                      "PPO entropy bonus weight");
    auto* f_value = opt->add_option("--value-coef", o_value,
                                    "PPO value loss weight");
    auto* f_rollout = opt->add_option("--rollout", o_rollout,
                                      "PPO steps per rollout");
    auto* f_epochs = opt->add_option("--epochs", o_epochs,
                                     "PPO passes per rollout");
    auto* f_minibatch = opt->add_option("--minibatch", o_minibatch,
                                        "PPO minibatch size");
    opt->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    opt->callback([&] {
        spec.algorithm = *qcl::parse_algorithm(opt_algo);
        spec.timing = opt_timing == "wall" ? qcl::TimingMode::wall
                                           : qcl::TimingMode::none;
        if (*f_lr) {
            spec.sgd.learning_rate = o_lr;
            spec.ql.learning_rate = o_lr;
            spec.dqn.learning_rate = o_lr;
            spec.ppo.learning_rate = o_lr;
        }
        if (*f_ti) {
            spec.sgd.target_infidelity = o_ti;
            spec.ga.target_infidelity = o_ti;
        }
        if (*f_momentum)
            spec.sgd.momentum = o_momentum;
        if (*f_maxit)
            spec.sgd.max_iterations = o_maxit;
        if (*f_fd)
            spec.sgd.fd_step = o_fd;
        if (*f_pop)
            spec.ga.population_size = o_pop;
        if (*f_mut)
            spec.ga.mutation_rate = o_mut;
        if (*f_elite)
            spec.ga.elite_fraction = o_elite;
        if (*f_under)
            spec.ga.underdog_fraction = o_under;
        if (*f_gens)
            spec.ga.max_generations = o_gens;
        if (*f_gamma) {
            spec.ql.discount = o_gamma;
            spec.dqn.discount = o_gamma;
            spec.ppo.discount = o_gamma;
        }
        if (*f_epsilon)
            spec.ql.epsilon = o_epsilon;
        if (*f_episodes)
            spec.ql.max_episodes = o_episodes;
        if (*f_theta)
            spec.ql.theta_bins = o_theta;
        if (*f_phi)
            spec.ql.phi_bins = o_phi;
        if (*f_explore)
            spec.dqn.exploration_fraction = o_explore;
        if (*f_eps_start)
            spec.dqn.epsilon_start = o_eps_start;
        if (*f_eps_end)
            spec.dqn.epsilon_end = o_eps_end;
        if (*f_buffer)
            spec.dqn.buffer_capacity = o_buffer;
        if (*f_batch)
            spec.dqn.batch_size = o_batch;
        if (*f_tupdate)
            spec.dqn.target_update_every = o_tupdate;
        if (*f_tevery)
            spec.dqn.train_every = o_tevery;
        if (*f_budget) {
            spec.dqn.budget_steps = o_budget;
            spec.ppo.budget_steps = o_budget;
        }
        if (*f_clip)
            spec.ppo.clip = o_clip;
        if (*f_entropy)
            spec.ppo.entropy_coef = o_entropy;
        if (*f_value)
            spec.ppo.value_coef = o_value;
        if (*f_rollout)
            spec.ppo.rollout_steps = o_rollout;
        if (*f_epochs)
            spec.ppo.epochs = o_epochs;
        if (*f_minibatch)
            spec.ppo.minibatch_size = o_minibatch;
        if (spec.output_path.empty()) {
            qcl::ExperimentSpec quiet = spec;
            const auto records = qcl::run_experiment(quiet);
            std::cout << qcl::results_csv(spec, records);
        } else {
            qcl::run_experiment(spec);
        }
    });

    auto* an = app.add_subcommand(
        "analyze", "Cluster high-fidelity solutions and report the CDI");
    std::string an_input, an_out, an_overlap_out;
    double an_eps = 0.1, an_fmin = 0.95, an_exy = 0.02, an_ef = 0.01;
    int an_minpts = 5;
    an->add_option("--input", an_input, "Results CSV with pc1/pc2 columns")
        ->required();
    an->add_option("--eps", an_eps, "DBSCAN neighborhood radius")
        ->check(CLI::PositiveNumber);
    an->add_option("--min-pts", an_minpts, "DBSCAN core-point threshold")
        ->check(CLI::Range(1, 1000000));
    an->add_option("--fidelity-min", an_fmin,
                   "Keep points with fidelity strictly above this");
    an->add_option("--eps-xy", an_exy, "Overlap grouping radius")
        ->check(CLI::PositiveNumber);
    an->add_option("--eps-f", an_ef, "Overlap fidelity tolerance")
        ->check(CLI::PositiveNumber);
    an->add_option("--out", an_out, "Report JSON path (default stdout)");
    an->add_option("--overlap-out", an_overlap_out,
                   "Overlap CSV path (default: derived from --out)");
    an->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    an->callback([&] {
        run_analyze(an_input, an_eps, an_minpts, an_fmin, an_exy, an_ef,
                    an_out, an_overlap_out);
    });

    auto* pl = app.add_subcommand(
        "plot", "Render a fidelity-colored scatter SVG");
    std::string pl_input, pl_out;
    double pl_filter = 0.0, pl_radius = 2.5;
    pl->add_option("--input", pl_input, "CSV with pc1/pc2 or a1/a2 columns")
        ->required();
    pl->add_option("--out", pl_out, "Output SVG path (default stdout)");
    auto* f_filter = pl->add_option(
        "--filter", pl_filter, "Keep points with fidelity strictly above");
    pl->add_option("--marker-radius", pl_radius, "Marker radius in px")
        ->check(CLI::PositiveNumber);
    pl->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    pl->callback([&] {
        std::optional<double> filter;
        if (*f_filter)
            filter = pl_filter;
        run_plot(pl_input, pl_out, filter, pl_radius);
    });

    auto* sl = app.add_subcommand(
        "speed-limit", "Scan pulse durations for the shortest solvable one");
    double sl_max = qcl::kDefaultTotalTime;
    int sl_points = 40, sl_segments = 2;
    sl->add_option("--max-time", sl_max, "Largest duration to scan")
        ->check(CLI::PositiveNumber);
    sl->add_option("--scan-points", sl_points, "Durations to try")
        ->check(CLI::Range(1, 100000));
    sl->add_option("--segments", sl_segments, "Pulse segments per trial")
        ->check(CLI::Range(1, 64));
    sl->add_option("--config", config_path,
                 "Read key = value defaults from FILE");
    sl->callback([&] { run_speed_limit(sl_max, sl_points, sl_segments); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string path;
            if (args[i] == "--config" && i + 1 < args.size())
                path = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0)
                path = args[i].substr(9);
            if (path.empty())
                continue;
            const std::vector<std::string> extra =
                config_file_args(path, args);
            args.insert(args.end(), extra.begin(), extra.end());
            break;
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NotFound& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
