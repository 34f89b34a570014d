#include "qcl/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "qcl/errors.hpp"
#include "qcl/jsonio.hpp"

namespace qcl {

namespace {

// Cyclic Jacobi eigen-decomposition of a small symmetric matrix. Returns
// eigenvalues in `diag` and accumulates rotations into `vecs` (columns =
// eigenvectors). The convergence check runs before each sweep so an
// already-diagonal matrix, e.g. an isotropic covariance, is returned
// untouched instead of having its eigenbasis rotated.
void jacobi_eigen(std::vector<double>& a, int n, std::vector<double>& diag,
                  std::vector<double>& vecs) {
    auto at = [&](std::vector<double>& m, int r, int c) -> double& {
        return m[static_cast<std::size_t>(r * n + c)];
    };

    vecs.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        at(vecs, i, i) = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                off += std::abs(at(a, p, q));
        if (off <= 1e-12)
            break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(a, p, q);
                if (apq == 0.0)
                    continue;
                const double app = at(a, p, p);
                const double aqq = at(a, q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = at(a, k, p);
                    const double akq = at(a, k, q);
                    at(a, k, p) = c * akp - s * akq;
                    at(a, k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(a, p, k);
                    const double aqk = at(a, q, k);
                    at(a, p, k) = c * apk - s * aqk;
                    at(a, q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = at(vecs, k, p);
                    const double vkq = at(vecs, k, q);
                    at(vecs, k, p) = c * vkp - s * vkq;
                    at(vecs, k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    diag.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        diag[static_cast<std::size_t>(i)] = at(a, i, i);
}

void check_model(const PcaModel& m, const std::string& context) {
    const std::size_t n = m.mean.size();
    if (n < 2)
        throw schema_error(context + ": mean must have at least 2 entries");
    if (m.loadings.size() != n)
        throw schema_error(context + ": loadings row count differs from mean");
    for (int c = 0; c < 2; ++c) {
        double norm2 = 0.0;
        for (const auto& row : m.loadings)
            norm2 += row[static_cast<std::size_t>(c)] *
                     row[static_cast<std::size_t>(c)];
        if (std::abs(norm2 - 1.0) > 1e-10)
            throw schema_error(context + ": loadings column " +
                               std::to_string(c) + " is not unit length");
    }
    double dot = 0.0;
    for (const auto& row : m.loadings)
        dot += row[0] * row[1];
    if (std::abs(dot) > 1e-10)
        throw schema_error(context + ": loadings columns are not orthogonal");
    if (!(m.explained_variance[0] >= m.explained_variance[1]) ||
        m.explained_variance[1] < 0.0)
        throw schema_error(context +
                           ": explained_variance must be descending and "
                           "non-negative");
}

} // namespace

PcaModel pca_fit_flat(const std::vector<double>& data, int n_cols) {
    if (n_cols < 2)
        throw invalid_argument("pca_fit: need at least 2 dimensions");
    const std::size_t n = static_cast<std::size_t>(n_cols);
    if (data.size() % n != 0)
        throw invalid_argument("pca_fit: data size not a multiple of n_cols");
    const std::size_t rows = data.size() / n;
    if (rows < 3)
        throw invalid_argument("pca_fit: need at least 3 rows");

    PcaModel model;
    model.mean.assign(n, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < n; ++c)
            model.mean[c] += data[r * n + c];
    for (double& m : model.mean)
        m /= static_cast<double>(rows);

    std::vector<double> cov(n * n, 0.0);
    std::vector<double> centered(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < n; ++c)
            centered[c] = data[r * n + c] - model.mean[c];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                cov[i * n + j] += centered[i] * centered[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            cov[i * n + j] /= static_cast<double>(rows - 1);
            cov[j * n + i] = cov[i * n + j];
        }

    const double total_var =
        [&] {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                t += cov[i * n + i];
            return t;
        }();
    if (total_var <= 1e-15)
        throw invalid_argument("pca_fit: data has no variance (rank 0)");

    std::vector<double> diag;
    std::vector<double> vecs;
    jacobi_eigen(cov, n_cols, diag, vecs);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return diag[a] > diag[b];
                     });

    model.loadings.assign(n, {0.0, 0.0});
    for (int c = 0; c < 2; ++c) {
        const std::size_t col = order[static_cast<std::size_t>(c)];
        // Sign convention: the entry of largest magnitude is positive;
        // ties resolve to the first such index.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(vecs[i * n + col]);
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = vecs[arg * n + col] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i)
            model.loadings[i][static_cast<std::size_t>(c)] =
                sign * vecs[i * n + col];
        model.explained_variance[static_cast<std::size_t>(c)] =
            std::max(0.0, diag[col]);
    }
    return model;
}

PcaModel pca_fit(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 3)
        throw invalid_argument("pca_fit: need at least 3 rows");
    const std::size_t n = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * n);
    for (const auto& row : rows) {
        if (row.size() != n)
            throw invalid_argument("pca_fit: rows have inconsistent lengths");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return pca_fit_flat(flat, static_cast<int>(n));
}

std::array<double, 2> pca_transform(const PcaModel& model,
                                    const std::vector<double>& point) {
    if (point.size() != model.mean.size())
        throw invalid_argument(
            "pca_transform: point dimension " + std::to_string(point.size()) +
            " does not match model dimension " +
            std::to_string(model.mean.size()));
    std::array<double, 2> out{0.0, 0.0};
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double centered = point[i] - model.mean[i];
        out[0] += centered * model.loadings[i][0];
        out[1] += centered * model.loadings[i][1];
    }
    return out;
}

std::vector<std::array<double, 2>>
pca_transform(const PcaModel& model,
              const std::vector<std::vector<double>>& points) {
    std::vector<std::array<double, 2>> out;
    out.reserve(points.size());
    for (const auto& p : points)
        out.push_back(pca_transform(model, p));
    return out;
}

std::string pca_to_json(const PcaModel& model) {
    JsonWriter w;
    w.begin_object();
    w.key("n_params").value(model.n_params());
    w.key("mean").value(model.mean);
    w.key("loadings").begin_array();
    for (const auto& row : model.loadings) {
        w.begin_array();
        w.value(row[0]);
        w.value(row[1]);
        w.end_array();
    }
    w.end_array();
    w.key("explained_variance").begin_array();
    w.value(model.explained_variance[0]);
    w.value(model.explained_variance[1]);
    w.end_array();
    w.end_object();
    return w.str() + "\n";
}

void pca_save(const PcaModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw schema_error("pca_save: cannot open " + path + " for writing");
    out << pca_to_json(model);
    if (!out)
        throw schema_error("pca_save: write to " + path + " failed");
}

PcaModel pca_from_json(const std::string& text, const std::string& context) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(context + ": invalid JSON: " + e.what());
    }
    if (!j.is_object())
        throw schema_error(context + ": top level must be an object");
    for (const char* field :
         {"n_params", "mean", "loadings", "explained_variance"})
        if (!j.contains(field))
            throw schema_error(context + ": missing field '" + field + "'");

    PcaModel m;
    if (!j["n_params"].is_number_integer())
        throw schema_error(context + ": field 'n_params' must be an integer");
    const int n = j["n_params"].get<int>();

    if (!j["mean"].is_array())
        throw schema_error(context + ": field 'mean' must be an array");
    for (const auto& v : j["mean"]) {
        if (!v.is_number())
            throw schema_error(context + ": field 'mean' must hold numbers");
        m.mean.push_back(v.get<double>());
    }
    if (static_cast<int>(m.mean.size()) != n)
        throw schema_error(context + ": field 'mean' length differs from "
                                     "'n_params'");

    if (!j["loadings"].is_array())
        throw schema_error(context + ": field 'loadings' must be an array");
    for (const auto& row : j["loadings"]) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
            !row[1].is_number())
            throw schema_error(context + ": field 'loadings' rows must be "
                                         "pairs of numbers");
        m.loadings.push_back({row[0].get<double>(), row[1].get<double>()});
    }

    const auto& ev = j["explained_variance"];
    if (!ev.is_array() || ev.size() != 2 || !ev[0].is_number() ||
        !ev[1].is_number())
        throw schema_error(context + ": field 'explained_variance' must be a "
                                     "pair of numbers");
    m.explained_variance = {ev[0].get<double>(), ev[1].get<double>()};

    check_model(m, context);
    return m;
}

PcaModel pca_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw schema_error("pca_load: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return pca_from_json(buf.str(), path);
}

} // namespace qcl
