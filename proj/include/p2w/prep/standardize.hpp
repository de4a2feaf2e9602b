#pragma once

#include <Eigen/Dense>

#include "p2w/common/json_io.hpp"

namespace p2w::prep {

/// Per-dimension affine conditioning fitted on phase-1 reduced traces.
struct Standardizer {
    static constexpr double kStdFloor = 1e-12;

    Eigen::VectorXd mean;
    Eigen::VectorXd stddev; // population std, floored at kStdFloor

    static Standardizer fit(const Eigen::MatrixXd& rows);

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;
    Eigen::VectorXd invert(const Eigen::VectorXd& v) const;
};

Json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const Json& j);

} // namespace p2w::prep
