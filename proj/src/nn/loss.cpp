#include "p2w/nn/ops.hpp"

#include "p2w/common/error.hpp"

namespace p2w::nn {

double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("mse: prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
                         " but target is " + std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
    }
    if (pred.rows() < 1) throw ShapeError("mse: empty batch");
    return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    Eigen::MatrixXd mask(rows, cols);
    if (rate <= 0.0) {
        mask.setOnes();
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

Eigen::MatrixXd dropout_apply(const Eigen::MatrixXd& x, double rate, Rng& rng) {
    if (rate <= 0.0) return x;
    return x.cwiseProduct(dropout_mask(x.rows(), x.cols(), rate, rng));
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        out.row(r) = (z.row(r).array() - m).exp();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

} // namespace p2w::nn
