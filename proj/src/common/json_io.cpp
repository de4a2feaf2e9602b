#include "p2w/common/json_io.hpp"

#include <bit>
#include <fstream>

#include "p2w/common/digest.hpp"
#include "p2w/common/error.hpp"

namespace p2w {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order and require a little-endian host");

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

namespace {

template <typename T>
void write_raw(const std::filesystem::path& path, std::span<const T> values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
std::vector<T> read_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw ValidationError("cannot open " + path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % sizeof(T) != 0) {
        throw ValidationError(path.string() + ": size is not a multiple of " +
                              std::to_string(sizeof(T)) + " bytes");
    }
    std::vector<T> values(bytes / sizeof(T));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    return values;
}

} // namespace

void write_f32(const std::filesystem::path& path, std::span<const float> values) { write_raw(path, values); }
void write_f64(const std::filesystem::path& path, std::span<const double> values) { write_raw(path, values); }
std::vector<float> read_f32(const std::filesystem::path& path) { return read_raw<float>(path); }
std::vector<double> read_f64(const std::filesystem::path& path) { return read_raw<double>(path); }

std::string json_digest(const Json& doc) { return digest_hex(doc.dump()); }

} // namespace p2w
