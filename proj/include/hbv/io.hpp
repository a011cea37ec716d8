#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hbv/field.hpp"
#include "hbv/grid.hpp"

namespace hbv {

// Decimal with 17 significant digits: lossless for doubles and byte-stable.
inline std::string format_double(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Serializer for report/shape JSON documents. nlohmann's dump() prints
// shortest-round-trip numbers; the file contracts here want a fixed 17
// significant digit encoding, so emission goes through this walker.
inline void dump_json17(const nlohmann::ordered_json& j, std::string& out) {
    using J = nlohmann::ordered_json;
    switch (j.type()) {
        case J::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += J(it.key()).dump();
                out += ':';
                dump_json17(it.value(), out);
            }
            out += '}';
            break;
        }
        case J::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += ',';
                first = false;
                dump_json17(e, out);
            }
            out += ']';
            break;
        }
        case J::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        default:
            out += j.dump();
    }
}

inline std::string dump_json17(const nlohmann::ordered_json& j) {
    std::string s;
    dump_json17(j, s);
    return s;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open for writing: " + path);
    os << content;
    if (!os) throw Error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// --- HBVSET / HBVFIELD rasters ---
// Line 1: MAGIC <dim> <n1> ... <nd> <h> <origin components>, then one token
// per cell in row-major order, axis 0 slowest.

namespace detail {

inline std::string raster_header(const char* magic, const Grid& g) {
    std::string s = magic;
    s += ' ';
    s += std::to_string(g.dim);
    for (int i = 0; i < g.dim; ++i) {
        s += ' ';
        s += std::to_string(g.shape[i]);
    }
    s += ' ';
    s += format_double(g.spacing);
    for (int i = 0; i < g.dim; ++i) {
        s += ' ';
        s += format_double(g.origin[i]);
    }
    s += '\n';
    return s;
}

inline Grid parse_raster_header(std::istream& is, const char* magic) {
    std::string tag;
    is >> tag;
    if (tag != magic) throw Error(std::string("bad raster magic, expected ") + magic + " got '" + tag + "'");
    int dim = 0;
    is >> dim;
    if (dim < 1 || dim > 3) throw Error("raster: bad dim");
    std::array<int, 3> shape{1, 1, 1};
    for (int i = 0; i < dim; ++i) is >> shape[i];
    double h = 0;
    is >> h;
    Vec3 origin{0, 0, 0};
    for (int i = 0; i < dim; ++i) is >> origin[i];
    if (!is) throw Error("raster: truncated header");
    return Grid(dim, shape, h, origin);
}

}  // namespace detail

inline std::string to_hbvset(const CellSet& s) {
    std::string out = detail::raster_header("HBVSET", s.grid);
    const std::size_t row = static_cast<std::size_t>(s.grid.shape[s.grid.dim - 1]);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += s.m[i] ? '1' : '0';
        out += (i % row == row - 1) ? '\n' : ' ';
    }
    return out;
}

inline CellSet hbvset_from_string(const std::string& text) {
    std::istringstream is(text);
    Grid g = detail::parse_raster_header(is, "HBVSET");
    CellSet s(g);
    for (std::size_t i = 0; i < s.size(); ++i) {
        int b = -1;
        is >> b;
        if (b != 0 && b != 1) throw Error("HBVSET: expected 0/1 token");
        s.m[i] = static_cast<std::uint8_t>(b);
    }
    return s;
}

inline std::string to_hbvfield(const ScalarField& f) {
    std::string out = detail::raster_header("HBVFIELD", f.grid);
    const std::size_t row = static_cast<std::size_t>(f.grid.shape[f.grid.dim - 1]);
    for (std::size_t i = 0; i < f.size(); ++i) {
        out += format_double(f.v[i]);
        out += (i % row == row - 1) ? '\n' : ' ';
    }
    return out;
}

inline ScalarField hbvfield_from_string(const std::string& text) {
    std::istringstream is(text);
    Grid g = detail::parse_raster_header(is, "HBVFIELD");
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(is >> f.v[i])) throw Error("HBVFIELD: truncated data");
    }
    return f;
}

inline void save_hbvset(const CellSet& s, const std::string& path) {
    write_text_file(path, to_hbvset(s));
}
inline CellSet load_hbvset(const std::string& path) { return hbvset_from_string(read_text_file(path)); }
inline void save_hbvfield(const ScalarField& f, const std::string& path) {
    write_text_file(path, to_hbvfield(f));
}
inline ScalarField load_hbvfield(const std::string& path) {
    return hbvfield_from_string(read_text_file(path));
}

}  // namespace hbv
