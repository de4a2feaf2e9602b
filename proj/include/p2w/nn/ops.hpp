#pragma once

#include <Eigen/Dense>

#include "p2w/common/rng.hpp"

namespace p2w::nn {

/// (1/N) * sum_i ||pred_i - target_i||^2 over the rows of a batch.
double loss_mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// Inverted dropout: zero each entry with probability `rate`, scale survivors by 1/(1-rate).
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);
Eigen::MatrixXd dropout_apply(const Eigen::MatrixXd& x, double rate, Rng& rng);

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z);
/// Row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z);

bool all_finite(const Eigen::MatrixXd& m);

} // namespace p2w::nn
