#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fields.hpp"
#include "json.hpp"

namespace burgers::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 17 significant digits, locale independent
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const void* p, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string grid_hash(const Grid3D& g) {
    const double d[4] = {g.perp.L, double(g.perp.N), g.L3, double(g.N3)};
    return hex64(fnv1a(d, sizeof d));
}
inline std::string grid_hash(const Grid2D& g) { return grid_hash(Grid3D(g, 0.5, 1)); }

// Writes through a temporary sibling and renames over the target.
inline void write_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(bytes.data(), std::streamsize(bytes.size()));
        f.flush();
        if (!f) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("rename failed: " + path.string());
    }
}

inline std::string read_all(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

// Snapshot: one JSON header line, then float64 little-endian payload.
// Layout: component-major, then slice-major (x3), then row-major (x1, x2).
struct Snapshot {
    double L_perp = 0.0, L_3 = 0.0;
    int N_perp = 0, N_3 = 1, components = 1;
    std::vector<double> data;

    Grid2D grid2d() const { return Grid2D(L_perp, N_perp); }
    Grid3D grid3d() const { return Grid3D(grid2d(), L_3, N_3); }
    std::size_t component_size() const { return std::size_t(N_perp) * N_perp * N_3; }
};

inline json snapshot_header(const Snapshot& s) {
    return json{{"format", "burgers-field"},
                {"version", 1},
                {"L_perp", s.L_perp},
                {"N_perp", s.N_perp},
                {"L_3", s.L_3},
                {"N_3", s.N_3},
                {"components", s.components},
                {"ordering", "component-major,slice-major,row-major"},
                {"dtype", "float64-le"},
                {"count", s.data.size()},
                {"checksum", hex64(fnv1a(s.data.data(), s.data.size() * sizeof(double)))}};
}

inline void write_snapshot(const fs::path& path, const Snapshot& s) {
    if (s.data.size() != s.component_size() * std::size_t(s.components))
        throw IoError("write_snapshot: payload size does not match the header shape");
    std::string bytes = snapshot_header(s).dump() + "\n";
    const std::size_t off = bytes.size();
    bytes.resize(off + s.data.size() * sizeof(double));
    std::memcpy(bytes.data() + off, s.data.data(), s.data.size() * sizeof(double));
    write_atomic(path, bytes);
}

inline Snapshot read_snapshot(const fs::path& path) {
    const std::string bytes = read_all(path);
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw IoError(path.string() + ": missing header line");
    json h;
    try {
        h = json::parse(bytes.substr(0, nl));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": malformed header: " + e.what());
    }
    Snapshot s;
    try {
        if (h.at("format") != "burgers-field" || h.at("version") != 1) throw IoError(path.string() + ": unknown format");
        if (h.at("dtype") != "float64-le") throw IoError(path.string() + ": unsupported dtype");
        if (h.at("ordering") != "component-major,slice-major,row-major") throw IoError(path.string() + ": unsupported ordering");
        s.L_perp = h.at("L_perp").get<double>();
        s.N_perp = h.at("N_perp").get<int>();
        s.L_3 = h.at("L_3").get<double>();
        s.N_3 = h.at("N_3").get<int>();
        s.components = h.at("components").get<int>();
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": bad header field: " + e.what());
    }
    if (s.N_perp < 1 || s.N_3 < 1 || s.components < 1 || !(s.L_perp > 0.0) || !(s.L_3 > 0.0))
        throw IoError(path.string() + ": invalid shape in header");
    const std::size_t count = s.component_size() * std::size_t(s.components);
    if (h.value("count", std::size_t(0)) != count) throw IoError(path.string() + ": count does not match shape");
    if (bytes.size() - nl - 1 != count * sizeof(double)) throw IoError(path.string() + ": truncated or oversized payload");
    s.data.resize(count);
    std::memcpy(s.data.data(), bytes.data() + nl + 1, count * sizeof(double));
    if (h.value("checksum", std::string()) != hex64(fnv1a(s.data.data(), count * sizeof(double))))
        throw IoError(path.string() + ": checksum mismatch");
    detail::require_finite(s.data, "read_snapshot");
    return s;
}

inline Snapshot to_snapshot(const Field2D& f) {
    Snapshot s;
    s.L_perp = f.grid().L;
    s.N_perp = f.N();
    s.L_3 = 1.0;
    s.N_3 = 1;
    s.data = f.values();
    return s;
}

inline Snapshot to_snapshot(const std::vector<const SlicedField3D*>& comps) {
    if (comps.empty()) throw IoError("to_snapshot: no components");
    const Grid3D& g = comps.front()->grid();
    Snapshot s;
    s.L_perp = g.perp.L;
    s.N_perp = g.perp.N;
    s.L_3 = g.L3;
    s.N_3 = g.N3;
    s.components = int(comps.size());
    for (const auto* c : comps) {
        if (!(c->grid() == g)) throw IoError("to_snapshot: components on different grids");
        s.data.insert(s.data.end(), c->values().begin(), c->values().end());
    }
    return s;
}

inline void write_field(const fs::path& path, const Field2D& f) { write_snapshot(path, to_snapshot(f)); }

inline Field2D read_field2d(const fs::path& path, const Grid2D& expected) {
    Snapshot s = read_snapshot(path);
    if (s.components != 1 || s.N_3 != 1) throw IoError(path.string() + ": not a single 2D field");
    if (!(s.grid2d() == expected)) throw IoError(path.string() + ": grid mismatch");
    return Field2D(expected, std::move(s.data));
}

inline std::vector<SlicedField3D> read_fields3d(const fs::path& path, const Grid3D& expected, int components) {
    Snapshot s = read_snapshot(path);
    if (s.components != components) throw IoError(path.string() + ": component count mismatch");
    if (!(s.grid3d() == expected)) throw IoError(path.string() + ": grid mismatch");
    std::vector<SlicedField3D> out;
    const std::size_t n = s.component_size();
    for (int c = 0; c < components; ++c)
        out.emplace_back(expected, std::vector<double>(s.data.begin() + std::ptrdiff_t(c * n),
                                                       s.data.begin() + std::ptrdiff_t((c + 1) * n)));
    return out;
}

// Plain CSV; numbers at 17 significant digits.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {
        for (std::size_t i = 0; i < cols_.size(); ++i) out_ += (i ? "," : "") + cols_[i];
        out_ += "\n";
    }
    void row(const std::vector<double>& v) {
        if (v.size() != cols_.size()) throw IoError("CsvWriter: row width mismatch");
        for (std::size_t i = 0; i < v.size(); ++i) out_ += (i ? "," : "") + fmt(v[i]);
        out_ += "\n";
    }
    const std::string& str() const { return out_; }
    void save(const fs::path& path) const { write_atomic(path, out_); }

private:
    std::vector<std::string> cols_;
    std::string out_;
};

inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

// One manifest.json per run directory, written once.
class RunManifest {
public:
    RunManifest(fs::path dir, std::string command, json config)
        : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
        doc_["command"] = std::move(command);
        doc_["config"] = std::move(config);
        doc_["software_version"] = kVersion;
        doc_["outputs"] = json::array();
        doc_["grid_hashes"] = json::object();
        doc_["pass_flags"] = json::object();
    }
    static constexpr const char* kVersion = "1.0.0";

    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& name) const { return dir_ / name; }

    void add_output(const std::string& name) { doc_["outputs"].push_back(name); }
    void save_text(const std::string& name, const std::string& text) {
        write_atomic(path(name), text);
        add_output(name);
    }
    void save_snapshot(const std::string& name, const Snapshot& s) {
        write_snapshot(path(name), s);
        add_output(name);
    }
    void grid(const std::string& name, const std::string& hash) { doc_["grid_hashes"][name] = hash; }
    void flag(const std::string& name, bool ok) { doc_["pass_flags"][name] = ok; }
    json& extra() { return doc_; }

    // wall_clock is left out when deterministic output is requested
    void write(bool record_wall_clock = true) {
        if (written_) throw IoError("RunManifest: already written");
        if (record_wall_clock)
            doc_["wall_clock_seconds"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        for (const auto& o : doc_["outputs"])
            if (!fs::exists(dir_ / o.get<std::string>())) throw IoError("RunManifest: missing output " + o.get<std::string>());
        write_atomic(dir_ / "manifest.json", json_text(doc_));
        written_ = true;
    }

private:
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    json doc_;
    bool written_ = false;
};

}  // namespace burgers::io
