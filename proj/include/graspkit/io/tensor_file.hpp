#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspkit/core/error.hpp"

// Parameter serialization: a flat binary file of little-endian 64-bit floats
// holding the named tensors back to back, plus a JSON sidecar at
// <path>.json describing names, shapes, offsets and an arbitrary config
// object. Round-trips are byte-identical.
namespace graspkit::io {

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;

    std::size_t count() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
};

namespace detail {

inline void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xFF));
}

inline double get_f64_le(const std::uint8_t* p) {
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace detail

inline void save_tensors(const std::filesystem::path& path,
                         const std::vector<NamedTensor>& tensors,
                         const nlohmann::json& config) {
    nlohmann::json meta;
    meta["schema_version"] = 1;
    meta["dtype"] = "f64le";
    meta["config"] = config;
    meta["tensors"] = nlohmann::json::array();

    std::vector<std::uint8_t> bytes;
    std::size_t offset = 0;
    for (const NamedTensor& t : tensors) {
        if (t.data.size() != t.count()) {
            throw UsageError("save_tensors: tensor \"" + t.name +
                             "\" data does not match its shape");
        }
        meta["tensors"].push_back(
            {{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
        for (double v : t.data) detail::put_f64_le(bytes, v);
        offset += t.data.size();
    }

    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + path.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + path.string());
    }
    {
        std::ofstream out(path.string() + ".json", std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + path.string() + ".json");
        out << meta.dump(2) << "\n";
    }
}

struct TensorFile {
    std::vector<NamedTensor> tensors;
    nlohmann::json config;

    const NamedTensor& get(const std::string& name) const {
        for (const NamedTensor& t : tensors) {
            if (t.name == name) return t;
        }
        throw FormatError("tensor file: missing tensor \"" + name + "\"");
    }
};

inline TensorFile load_tensors(const std::filesystem::path& path) {
    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw IoError("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(bin)),
                                    std::istreambuf_iterator<char>());

    std::ifstream meta_in(path.string() + ".json");
    if (!meta_in) throw IoError("cannot open sidecar: " + path.string() + ".json");
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("tensor sidecar " + path.string() + ".json: " + e.what());
    }

    TensorFile file;
    try {
        if (meta.value("dtype", "") != "f64le") {
            throw FormatError("tensor sidecar: unsupported dtype");
        }
        file.config = meta.value("config", nlohmann::json::object());
        for (const auto& jt : meta.at("tensors")) {
            NamedTensor t;
            t.name = jt.at("name").get<std::string>();
            t.shape = jt.at("shape").get<std::vector<int>>();
            const std::size_t offset = jt.at("offset").get<std::size_t>();
            const std::size_t count = t.count();
            if ((offset + count) * 8 > bytes.size()) {
                throw FormatError("tensor file " + path.string() + ": tensor \"" + t.name +
                                  "\" exceeds file size");
            }
            t.data.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                t.data[i] = detail::get_f64_le(bytes.data() + (offset + i) * 8);
            }
            file.tensors.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("tensor sidecar " + path.string() + ".json: " + e.what());
    }
    return file;
}

} // namespace graspkit::io
