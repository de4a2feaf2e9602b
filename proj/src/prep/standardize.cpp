#include "p2w/prep/standardize.hpp"

#include <cmath>

#include "p2w/common/error.hpp"

namespace p2w::prep {

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 1) throw ValidationError("standardize: no rows to fit");
    Standardizer s;
    s.mean = rows.colwise().mean().transpose();
    const Eigen::MatrixXd centered = rows.rowwise() - s.mean.transpose();
    s.stddev = (centered.colwise().squaredNorm() / static_cast<double>(rows.rows())).cwiseSqrt().transpose();
    s.stddev = s.stddev.cwiseMax(kStdFloor);
    return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& v) const {
    if (v.size() != mean.size()) throw ShapeError("standardize: vector length differs from fitted dimension");
    return (v - mean).cwiseQuotient(stddev);
}

Eigen::MatrixXd Standardizer::apply_rows(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size()) throw ShapeError("standardize: row length differs from fitted dimension");
    Eigen::MatrixXd out = rows.rowwise() - mean.transpose();
    return out.array().rowwise() / stddev.transpose().array();
}

Eigen::VectorXd Standardizer::invert(const Eigen::VectorXd& v) const {
    if (v.size() != mean.size()) throw ShapeError("standardize: vector length differs from fitted dimension");
    return v.cwiseProduct(stddev) + mean;
}

Json to_json(const Standardizer& s) {
    return Json{{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
                {"std", std::vector<double>(s.stddev.data(), s.stddev.data() + s.stddev.size())}};
}

Standardizer standardizer_from_json(const Json& j) {
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto d = j.at("std").get<std::vector<double>>();
    if (m.size() != d.size()) throw ValidationError("standardizer mean/std lengths differ");
    Standardizer s;
    s.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    s.stddev = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
    return s;
}

} // namespace p2w::prep
