#include "p2w/data/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"

namespace p2w::data {

void LabeledDataset::validate() const {
    if (class_count < 1) throw ValidationError(name + ": class count must be positive");
    if (samples.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ValidationError(name + ": " + std::to_string(samples.rows()) + " samples but " +
                              std::to_string(labels.size()) + " labels");
    }
    if (size() < class_count) {
        throw ValidationError(name + ": " + std::to_string(size()) + " samples cannot cover " +
                              std::to_string(class_count) + " classes");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count) {
            throw ValidationError(name + ": label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                  " is outside [0, " + std::to_string(class_count) + ")");
        }
    }
    const auto counts = class_counts();
    for (int c = 0; c < class_count; ++c) {
        if (counts[c] == 0) throw ValidationError(name + ": class " + std::to_string(c) + " has no samples");
    }
    if (!samples.allFinite()) throw ValidationError(name + ": non-finite feature value");
}

std::vector<int> LabeledDataset::class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(std::max(class_count, 0)), 0);
    for (int l : labels) {
        if (l >= 0 && l < class_count) ++counts[l];
    }
    return counts;
}

LabeledDataset LabeledDataset::subset(const std::vector<int>& rows, const std::string& suffix) const {
    LabeledDataset out;
    out.name = name + suffix;
    out.class_count = class_count;
    out.scaling = scaling;
    out.samples.resize(static_cast<Eigen::Index>(rows.size()), samples.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.samples.row(static_cast<Eigen::Index>(i)) = samples.row(rows[i]);
        out.labels.push_back(labels[rows[i]]);
    }
    return out;
}

Eigen::MatrixXd LabeledDataset::targets(int output_width) const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(size(), output_width);
    for (int i = 0; i < size(); ++i) {
        if (output_width == 1) {
            t(i, 0) = labels[i] == 1 ? 1.0 : 0.0;
        } else {
            t(i, labels[i]) = 1.0;
        }
    }
    return t;
}

std::string LabeledDataset::digest() const {
    Digest d;
    d.text(name).u64(static_cast<std::uint64_t>(class_count));
    d.reals({samples.data(), static_cast<std::size_t>(samples.size())}).ints(labels);
    return d.hex();
}

namespace {

std::vector<std::vector<int>> rows_by_class(const LabeledDataset& dataset) {
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(dataset.class_count));
    for (int i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);
    return by_class;
}

} // namespace

std::vector<LabeledDataset> chunk(const LabeledDataset& dataset, int chunk_count) {
    dataset.validate();
    if (chunk_count < 1) throw ValidationError("chunk count must be positive");
    if (chunk_count > dataset.size() / dataset.class_count) {
        throw ValidationError(dataset.name + ": " + std::to_string(chunk_count) + " chunks exceed N/C = " +
                              std::to_string(dataset.size() / dataset.class_count));
    }
    const auto by_class = rows_by_class(dataset);
    for (int c = 0; c < dataset.class_count; ++c) {
        if (static_cast<int>(by_class[c].size()) < chunk_count) {
            throw ValidationError(dataset.name + ": class " + std::to_string(c) + " has " +
                                  std::to_string(by_class[c].size()) + " samples, too few to stratify into " +
                                  std::to_string(chunk_count) + " chunks");
        }
    }
    // deal each class round-robin, continuing the chunk cursor across classes
    std::vector<std::vector<int>> members(static_cast<std::size_t>(chunk_count));
    int cursor = 0;
    for (const auto& rows : by_class) {
        for (int r : rows) {
            members[cursor].push_back(r);
            cursor = (cursor + 1) % chunk_count;
        }
    }
    std::vector<LabeledDataset> out;
    for (int k = 0; k < chunk_count; ++k) {
        std::sort(members[k].begin(), members[k].end());
        out.push_back(dataset.subset(members[k], "/chunk" + std::to_string(k)));
    }
    return out;
}

SampleMode sample_mode_from_string(const std::string& s) {
    if (s == "balanced") return SampleMode::Balanced;
    if (s == "imbalanced2x") return SampleMode::Imbalanced2x;
    throw ValidationError("unknown sampling mode '" + s + "'");
}

std::string to_string(SampleMode m) { return m == SampleMode::Balanced ? "balanced" : "imbalanced2x"; }

LabeledDataset sample_dsmall(const LabeledDataset& dataset, int size, SampleMode mode, std::uint64_t seed) {
    dataset.validate();
    const int C = dataset.class_count;
    if (size < 2 * C) {
        throw ValidationError("D_small size " + std::to_string(size) + " is below 2 x " + std::to_string(C) +
                              " classes");
    }
    Rng rng(seed);
    std::vector<int> want(static_cast<std::size_t>(C));
    std::optional<int> skewed;
    if (mode == SampleMode::Balanced) {
        for (int c = 0; c < C; ++c) want[c] = size / C + (c < size % C ? 1 : 0);
    } else {
        skewed = static_cast<int>(rng.below(static_cast<std::uint64_t>(C)));
        // solve 2x + (C-1)x = size, give the rounding slack to the skewed class
        const int base = std::max(1, static_cast<int>(std::lround(static_cast<double>(size) / (C + 1))));
        for (int c = 0; c < C; ++c) want[c] = base;
        want[*skewed] = size - base * (C - 1);
    }

    auto by_class = rows_by_class(dataset);
    std::vector<int> picked;
    for (int c = 0; c < C; ++c) {
        if (static_cast<int>(by_class[c].size()) < want[c]) {
            throw ValidationError(dataset.name + ": class " + std::to_string(c) + " has " +
                                  std::to_string(by_class[c].size()) + " samples, D_small needs " +
                                  std::to_string(want[c]));
        }
        rng.shuffle(std::span<int>(by_class[c]));
        picked.insert(picked.end(), by_class[c].begin(), by_class[c].begin() + want[c]);
    }
    rng.shuffle(std::span<int>(picked));
    LabeledDataset out = dataset.subset(picked, "/dsmall-" + to_string(mode));
    out.skewed_class = skewed;
    return out;
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(const LabeledDataset& dataset, double first_fraction,
                                                               std::uint64_t seed) {
    Rng rng(seed);
    auto by_class = rows_by_class(dataset);
    std::vector<int> first;
    std::vector<int> second;
    for (auto& rows : by_class) {
        rng.shuffle(std::span<int>(rows));
        auto n_first = static_cast<std::size_t>(std::lround(first_fraction * static_cast<double>(rows.size())));
        // keep at least one sample of each class on both sides when possible
        if (rows.size() >= 2) n_first = std::clamp<std::size_t>(n_first, 1, rows.size() - 1);
        first.insert(first.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_first));
        second.insert(second.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_first), rows.end());
    }
    rng.shuffle(std::span<int>(first));
    rng.shuffle(std::span<int>(second));
    return {first, second};
}

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset) {
    std::filesystem::create_directories(dir);
    Json meta{{"name", dataset.name},
              {"d", dataset.features()},
              {"C", dataset.class_count},
              {"N", dataset.size()},
              {"digest", dataset.digest()}};
    if (dataset.scaling) meta["scaling"] = {{"min", dataset.scaling->min}, {"max", dataset.scaling->max}};
    if (dataset.skewed_class) meta["skewed_class"] = *dataset.skewed_class;
    write_json(dir / "data.json", meta);
    std::vector<float> flat;
    flat.reserve(static_cast<std::size_t>(dataset.samples.size() + dataset.size()));
    for (Eigen::Index r = 0; r < dataset.samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < dataset.samples.cols(); ++c) flat.push_back(static_cast<float>(dataset.samples(r, c)));
    }
    for (int l : dataset.labels) flat.push_back(static_cast<float>(l));
    write_f32(dir / "data.f32", flat);
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
    const Json meta = read_json(dir / "data.json");
    LabeledDataset ds;
    ds.name = meta.at("name").get<std::string>();
    ds.class_count = meta.at("C").get<int>();
    const int d = meta.at("d").get<int>();
    const int n = meta.at("N").get<int>();
    const auto flat = read_f32(dir / "data.f32");
    if (flat.size() != static_cast<std::size_t>(n) * (d + 1)) {
        throw ValidationError(dir.string() + "/data.f32 has " + std::to_string(flat.size()) + " values, expected " +
                              std::to_string(static_cast<std::size_t>(n) * (d + 1)));
    }
    ds.samples.resize(n, d);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < d; ++c) ds.samples(r, c) = flat[static_cast<std::size_t>(r) * d + c];
    }
    for (int r = 0; r < n; ++r) ds.labels.push_back(static_cast<int>(flat[static_cast<std::size_t>(n) * d + r]));
    if (meta.contains("scaling")) {
        ds.scaling = ScalingStats{meta["scaling"].at("min").get<std::vector<double>>(),
                                  meta["scaling"].at("max").get<std::vector<double>>()};
    }
    if (meta.contains("skewed_class")) ds.skewed_class = meta.at("skewed_class").get<int>();
    ds.validate();
    return ds;
}

} // namespace p2w::data
