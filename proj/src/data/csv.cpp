#include "p2w/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "p2w/common/error.hpp"

namespace p2w::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string where(const std::filesystem::path& path, std::size_t row, std::size_t col) {
    return path.string() + ": row " + std::to_string(row) + ", column " + std::to_string(col + 1);
}

} // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        std::optional<int> class_count) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": missing header row");
    const auto header = split_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw ValidationError(path.string() + ": no column named '" + label_column + "'");
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            // point at the first cell that is missing or surplus
            throw ValidationError(where(path, row_no, std::min(cells.size(), header.size())) + ": row has " +
                                  std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(header.size()));
        }
        std::vector<double> features;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto* first = cells[c].data();
            const auto* last = first + cells[c].size();
            const auto res = std::from_chars(first, last, v);
            if (cells[c].empty() || res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
                throw ValidationError(where(path, row_no, c) + ": '" + cells[c] + "' is not a finite number");
            }
            if (c == label_idx) {
                if (v < 0 || v != std::floor(v)) {
                    throw ValidationError(where(path, row_no, c) + ": label '" + cells[c] +
                                          "' is not a non-negative integer");
                }
                const int label = static_cast<int>(v);
                if (class_count && label >= *class_count) {
                    throw ValidationError(where(path, row_no, c) + ": unseen label " + std::to_string(label) +
                                          " (classes are 0.." + std::to_string(*class_count - 1) + ")");
                }
                labels.push_back(label);
            } else {
                features.push_back(v);
            }
        }
        rows.push_back(std::move(features));
    }
    if (rows.empty()) throw ValidationError(path.string() + ": no data rows");

    LabeledDataset ds;
    ds.name = path.stem().string();
    ds.labels = std::move(labels);
    ds.class_count = class_count.value_or(*std::max_element(ds.labels.begin(), ds.labels.end()) + 1);
    const std::size_t d = rows.front().size();
    ds.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    ScalingStats stats{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t c = 0; c < d; ++c) {
        double lo = rows[0][c];
        double hi = rows[0][c];
        for (const auto& r : rows) {
            lo = std::min(lo, r[c]);
            hi = std::max(hi, r[c]);
        }
        stats.min[c] = lo;
        stats.max[c] = hi;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            ds.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                hi > lo ? (rows[r][c] - lo) / (hi - lo) : 0.0;
        }
    }
    ds.scaling = std::move(stats);
    ds.validate();
    return ds;
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    for (int c = 0; c < dataset.features(); ++c) out << 'f' << c << ',';
    out << "label\n";
    out.precision(17);
    for (int r = 0; r < dataset.size(); ++r) {
        for (int c = 0; c < dataset.features(); ++c) out << dataset.samples(r, c) << ',';
        out << dataset.labels[r] << '\n';
    }
}

} // namespace p2w::data
