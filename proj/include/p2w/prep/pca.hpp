#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Dense>

namespace p2w::prep {

/// Principal axes of a set of traces. Rows of `components` are orthonormal and
/// ordered by descending eigenvalue; each row's largest-magnitude entry is positive.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components; // k x L
    Eigen::VectorXd eigenvalues; // sample-covariance eigenvalues of the kept axes

    int k() const { return static_cast<int>(components.rows()); }
    int length() const { return static_cast<int>(mean.size()); }
    std::string digest() const;
};

/// Fits on the rows of `traces` (N x L). Uses the N x N Gram matrix when N < L.
PcaModel pca_fit(const Eigen::MatrixXd& traces, int k);

/// components * (trace - mean). Throws ShapeError when the trace length differs from the fitted one.
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& trace);
Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& traces);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& reduced);

/// `pca.json` (k, L, digest) + `pca.f64` (mean, then components row by row, then eigenvalues).
void save_pca(const std::filesystem::path& dir, const PcaModel& model);
PcaModel load_pca(const std::filesystem::path& dir);

} // namespace p2w::prep
