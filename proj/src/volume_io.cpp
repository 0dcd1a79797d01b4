#include "c2f/volume_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace c2f {

namespace {

using nlohmann::json;

std::filesystem::path stem_of(const std::filesystem::path& path) {
    if (path.extension() == ".json" || path.extension() == ".raw") {
        std::filesystem::path p = path;
        p.replace_extension();
        return p;
    }
    return path;
}

struct Header {
    Dims3 dims;
    std::string dtype;
    Spacing3 spacing;
    std::string kind;
};

Header read_header(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) {
        throw VolumeFormatError("cannot open header " + json_path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw VolumeFormatError("header " + json_path.string() +
                                " is not valid JSON: " + e.what());
    }
    Header h;
    if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3) {
        throw VolumeFormatError("header field 'dims' must be [W,H,L]");
    }
    h.dims = {j["dims"][0].get<int>(), j["dims"][1].get<int>(),
              j["dims"][2].get<int>()};
    if (h.dims.w < 1 || h.dims.h < 1 || h.dims.l < 1) {
        throw VolumeFormatError("header field 'dims' has non-positive extent");
    }
    if (!j.contains("dtype") || !j["dtype"].is_string()) {
        throw VolumeFormatError("header field 'dtype' missing");
    }
    h.dtype = j["dtype"].get<std::string>();
    if (h.dtype != "f32" && h.dtype != "u8") {
        throw VolumeFormatError("header field 'dtype' unknown: '" + h.dtype +
                                "' (expected \"f32\" or \"u8\")");
    }
    if (!j.contains("spacing") || !j["spacing"].is_array() ||
        j["spacing"].size() != 3) {
        throw VolumeFormatError("header field 'spacing' must be [sx,sy,sz]");
    }
    h.spacing = {j["spacing"][0].get<double>(), j["spacing"][1].get<double>(),
                 j["spacing"][2].get<double>()};
    if (h.spacing.sx <= 0 || h.spacing.sy <= 0 || h.spacing.sz <= 0) {
        throw VolumeFormatError("header field 'spacing' must be positive");
    }
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw VolumeFormatError("header field 'kind' missing");
    }
    h.kind = j["kind"].get<std::string>();
    if (h.kind != "intensity" && h.kind != "mask") {
        throw VolumeFormatError("header field 'kind' unknown: '" + h.kind +
                                "' (expected \"intensity\" or \"mask\")");
    }
    return h;
}

void write_header(const std::filesystem::path& json_path, const Dims3& dims,
                  const std::string& dtype, const Spacing3& spacing,
                  const std::string& kind) {
    json j;
    j["dims"] = {dims.w, dims.h, dims.l};
    j["dtype"] = dtype;
    j["spacing"] = {spacing.sx, spacing.sy, spacing.sz};
    j["kind"] = kind;
    std::ofstream out(json_path);
    if (!out) {
        throw VolumeFormatError("cannot write header " + json_path.string());
    }
    out << j.dump(2) << "\n";
}

std::vector<char> read_payload(const std::filesystem::path& raw_path,
                               std::size_t expected_bytes) {
    std::ifstream in(raw_path, std::ios::binary);
    if (!in) {
        throw VolumeFormatError("cannot open payload " + raw_path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() != expected_bytes) {
        throw VolumeFormatError(
            "payload " + raw_path.string() + " has " +
            std::to_string(bytes.size()) + " bytes, expected " +
            std::to_string(expected_bytes));
    }
    return bytes;
}

void write_payload(const std::filesystem::path& raw_path, const void* data,
                   std::size_t bytes) {
    std::ofstream out(raw_path, std::ios::binary);
    if (!out) {
        throw VolumeFormatError("cannot write payload " + raw_path.string());
    }
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(bytes));
}

} // namespace

void write_volume(const Volume3D& volume, const std::filesystem::path& path) {
    auto stem = stem_of(path);
    write_header(stem.string() + ".json", volume.dims(), "f32",
                 volume.spacing(), "intensity");
    write_payload(stem.string() + ".raw", volume.data().data(),
                  volume.data().size() * sizeof(float));
}

Volume3D read_volume(const std::filesystem::path& path) {
    auto stem = stem_of(path);
    Header h = read_header(stem.string() + ".json");
    if (h.kind != "intensity") {
        throw VolumeFormatError("header field 'kind' is '" + h.kind +
                                "', expected \"intensity\"");
    }
    if (h.dtype != "f32") {
        throw VolumeFormatError(
            "header field 'dtype' must be \"f32\" for intensity volumes");
    }
    auto bytes = read_payload(stem.string() + ".raw",
                              h.dims.voxel_count() * sizeof(float));
    std::vector<float> data(h.dims.voxel_count());
    std::memcpy(data.data(), bytes.data(), bytes.size());
    return Volume3D(h.dims, h.spacing, std::move(data));
}

void write_mask(const Mask3D& mask, const std::filesystem::path& path,
                Spacing3 spacing) {
    auto stem = stem_of(path);
    if (mask.mode() == MaskMode::Binary) {
        write_header(stem.string() + ".json", mask.dims(), "u8", spacing,
                     "mask");
        std::vector<std::uint8_t> bytes(mask.data().size());
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            bytes[i] = mask.data()[i] != 0.0f ? 1 : 0;
        }
        write_payload(stem.string() + ".raw", bytes.data(), bytes.size());
    } else {
        write_header(stem.string() + ".json", mask.dims(), "f32", spacing,
                     "mask");
        write_payload(stem.string() + ".raw", mask.data().data(),
                      mask.data().size() * sizeof(float));
    }
}

Mask3D read_mask(const std::filesystem::path& path) {
    auto stem = stem_of(path);
    Header h = read_header(stem.string() + ".json");
    if (h.kind != "mask") {
        throw VolumeFormatError("header field 'kind' is '" + h.kind +
                                "', expected \"mask\"");
    }
    if (h.dtype == "u8") {
        auto bytes = read_payload(stem.string() + ".raw", h.dims.voxel_count());
        std::vector<float> data(h.dims.voxel_count());
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto b = static_cast<std::uint8_t>(bytes[i]);
            if (b > 1) {
                throw VolumeFormatError("payload voxel " + std::to_string(i) +
                                        " of u8 mask is not in {0,1}: " +
                                        std::to_string(b));
            }
            data[i] = static_cast<float>(b);
        }
        return Mask3D(h.dims, MaskMode::Binary, std::move(data));
    }
    auto bytes = read_payload(stem.string() + ".raw",
                              h.dims.voxel_count() * sizeof(float));
    std::vector<float> data(h.dims.voxel_count());
    std::memcpy(data.data(), bytes.data(), bytes.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(data[i] >= 0.0f && data[i] <= 1.0f)) {
            throw VolumeFormatError("payload voxel " + std::to_string(i) +
                                    " of f32 mask is outside [0,1]");
        }
    }
    return Mask3D(h.dims, MaskMode::Probability, std::move(data));
}

} // namespace c2f
