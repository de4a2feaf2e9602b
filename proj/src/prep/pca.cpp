#include "p2w/prep/pca.hpp"

#include <algorithm>
#include <cmath>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"
#include "p2w/common/json_io.hpp"

namespace p2w::prep {

namespace {

// Modified Gram-Schmidt over the rows, in order; rows that collapse are replaced by the
// first standard basis vector that is still independent of the accepted rows.
void orthonormalize_rows(Eigen::MatrixXd& rows) {
    const Eigen::Index L = rows.cols();
    Eigen::Index next_basis = 0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::VectorXd v = rows.row(i).transpose();
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index j = 0; j < i; ++j) v -= rows.row(j).dot(v) * rows.row(j).transpose();
        }
        while (v.norm() < 1e-6) {
            if (next_basis >= L) throw NumericalError("pca: cannot complete an orthonormal basis");
            v = Eigen::VectorXd::Unit(L, next_basis++);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index j = 0; j < i; ++j) v -= rows.row(j).dot(v) * rows.row(j).transpose();
            }
        }
        rows.row(i) = v.normalized().transpose();
    }
}

void fix_signs(Eigen::MatrixXd& rows) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            // first index wins on ties
            if (std::abs(rows(i, j)) > best + 1e-12) {
                best = std::abs(rows(i, j));
                arg = j;
            }
        }
        if (rows(i, arg) < 0) rows.row(i) *= -1.0;
    }
}

} // namespace

std::string PcaModel::digest() const {
    Digest d;
    d.text("pca").u64(static_cast<std::uint64_t>(k())).u64(static_cast<std::uint64_t>(length()));
    d.reals({mean.data(), static_cast<std::size_t>(mean.size())});
    d.reals({components.data(), static_cast<std::size_t>(components.size())});
    return d.hex();
}

PcaModel pca_fit(const Eigen::MatrixXd& traces, int k) {
    const Eigen::Index n = traces.rows();
    const Eigen::Index L = traces.cols();
    if (n < 2) throw ValidationError("pca: need at least 2 traces, got " + std::to_string(n));
    if (k < 1 || k > std::min(n, L)) {
        throw ValidationError("pca: k=" + std::to_string(k) + " must lie in [1, min(N=" + std::to_string(n) +
                              ", L=" + std::to_string(L) + ")]");
    }

    PcaModel model;
    model.mean = traces.colwise().mean().transpose();
    const Eigen::MatrixXd centered = traces.rowwise() - model.mean.transpose();
    const double denom = static_cast<double>(n - 1);

    model.components.resize(k, L);
    model.eigenvalues.resize(k);
    if (n >= L) {
        const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw NumericalError("pca: covariance eigensolver failed");
        for (int i = 0; i < k; ++i) {
            const Eigen::Index src = L - 1 - i;
            model.eigenvalues(i) = std::max(0.0, eig.eigenvalues()(src));
            model.components.row(i) = eig.eigenvectors().col(src).transpose();
        }
    } else {
        const Eigen::MatrixXd gram = centered * centered.transpose() / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.info() != Eigen::Success) throw NumericalError("pca: Gram eigensolver failed");
        const double top = std::max(eig.eigenvalues()(n - 1), 0.0);
        for (int i = 0; i < k; ++i) {
            const Eigen::Index src = n - 1 - i;
            const double lambda = std::max(0.0, eig.eigenvalues()(src));
            model.eigenvalues(i) = lambda;
            if (lambda > top * 1e-12 && lambda > 0.0) {
                const Eigen::VectorXd lifted = centered.transpose() * eig.eigenvectors().col(src);
                model.components.row(i) = lifted.normalized().transpose();
            } else {
                model.eigenvalues(i) = 0.0;
                model.components.row(i).setZero(); // completed below
            }
        }
    }
    orthonormalize_rows(model.components);
    fix_signs(model.components);
    return model;
}

Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::VectorXd& trace) {
    if (trace.size() != model.length()) {
        throw ShapeError("pca: trace has " + std::to_string(trace.size()) + " samples but the model was fitted on " +
                         std::to_string(model.length()) + "; topology violation, the device does not run the phase-1 topology");
    }
    return model.components * (trace - model.mean);
}

Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& traces) {
    if (traces.cols() != model.length()) {
        throw ShapeError("pca: traces have " + std::to_string(traces.cols()) +
                         " samples but the model was fitted on " + std::to_string(model.length()));
    }
    return (traces.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& reduced) {
    if (reduced.size() != model.k()) throw ShapeError("pca: reduced vector has the wrong length");
    return model.components.transpose() * reduced + model.mean;
}

void save_pca(const std::filesystem::path& dir, const PcaModel& model) {
    std::filesystem::create_directories(dir);
    write_json(dir / "pca.json", Json{{"k", model.k()}, {"L", model.length()}, {"digest", model.digest()}});
    std::vector<double> flat(model.mean.data(), model.mean.data() + model.mean.size());
    for (int i = 0; i < model.k(); ++i) {
        for (int j = 0; j < model.length(); ++j) flat.push_back(model.components(i, j));
    }
    flat.insert(flat.end(), model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
    write_f64(dir / "pca.f64", flat);
}

PcaModel load_pca(const std::filesystem::path& dir) {
    const Json meta = read_json(dir / "pca.json");
    const int k = meta.at("k").get<int>();
    const int L = meta.at("L").get<int>();
    const auto flat = read_f64(dir / "pca.f64");
    const std::size_t expected = static_cast<std::size_t>(L) + static_cast<std::size_t>(k) * L + k;
    if (flat.size() != expected) {
        throw ValidationError("pca.f64 holds " + std::to_string(flat.size()) + " values, expected " +
                              std::to_string(expected));
    }
    PcaModel m;
    m.mean = Eigen::Map<const Eigen::VectorXd>(flat.data(), L);
    m.components.resize(k, L);
    std::size_t offset = L;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < L; ++j) m.components(i, j) = flat[offset++];
    }
    m.eigenvalues = Eigen::Map<const Eigen::VectorXd>(flat.data() + offset, k);
    if (meta.contains("digest") && meta.at("digest") != m.digest()) {
        throw ValidationError("pca.f64 does not match the digest recorded in pca.json");
    }
    return m;
}

} // namespace p2w::prep
