#pragma once

#include <array>
#include <string>
#include <vector>

namespace qcl {

// Two-component PCA model. `loadings[i]` holds the coefficients of
// original dimension i in the two principal directions, i.e. the columns
// of the loadings matrix are the principal axes.
struct PcaModel {
    std::vector<double> mean;
    std::vector<std::array<double, 2>> loadings;
    std::array<double, 2> explained_variance{0.0, 0.0};

    int n_params() const { return static_cast<int>(mean.size()); }
};

// Fits mean and top-2 covariance eigenvectors (divisor n-1, cyclic Jacobi
// on the small covariance matrix). Deterministic: eigenpairs are ordered
// by descending eigenvalue and each column is sign-fixed so its
// largest-magnitude entry is positive.
PcaModel pca_fit(const std::vector<std::vector<double>>& rows);

// Same, over row-major flat data with n_cols values per row; avoids a
// million small vectors when fitting on full grids.
PcaModel pca_fit_flat(const std::vector<double>& data, int n_cols);

std::array<double, 2> pca_transform(const PcaModel& model,
                                    const std::vector<double>& point);

std::vector<std::array<double, 2>>
pca_transform(const PcaModel& model,
              const std::vector<std::vector<double>>& points);

// Persistence. The JSON schema is fixed:
// {"n_params", "mean", "loadings", "explained_variance"} with floats at
// 17 significant digits; writes are canonical so round trips are
// byte-identical. load() validates shape, orthonormality and variance
// ordering and throws schema_error naming the offending field.
std::string pca_to_json(const PcaModel& model);
void pca_save(const PcaModel& model, const std::string& path);
PcaModel pca_from_json(const std::string& text, const std::string& context);
PcaModel pca_load(const std::string& path);

} // namespace qcl
