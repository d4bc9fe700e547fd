/// @file io.hpp
/// @brief Bit-exact file formats: binary snapshot/basis/trajectory codecs
/// (little-endian, magic "TRRM") and the results CSV schema.

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trrom/pod.hpp"
#include "trrom/study.hpp"
#include "trrom/tr_rom.hpp"

namespace trrom {

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

static_assert(sizeof(double) == 8, "f64 layout assumed");

struct ByteWriter {
    std::ofstream out;
    explicit ByteWriter(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw CodecError("cannot open for writing: " + path);
    }
    void raw(const void* p, size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void f64s(const std::vector<double>& v) { raw(v.data(), v.size() * 8); }
    void f64s(const double* p, size_t n) { raw(p, n * 8); }
};

struct ByteReader {
    std::ifstream in;
    explicit ByteReader(const std::string& path) : in(path, std::ios::binary) {
        if (!in) throw CodecError("cannot open for reading: " + path);
    }
    void raw(void* p, size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in.gcount() != static_cast<std::streamsize>(n)) throw CodecError("truncated payload");
    }
    uint8_t u8() { uint8_t v; raw(&v, 1); return v; }
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
    double f64() { double v; raw(&v, 8); return v; }
    std::vector<double> f64s(size_t n) { std::vector<double> v(n); raw(v.data(), n * 8); return v; }
};

inline void write_header(ByteWriter& w, uint8_t kind, const Grid& g, uint32_t count) {
    w.raw("TRRM", 4);
    w.u32(1);
    w.u8(kind);
    w.u32(static_cast<uint32_t>(g.nx));
    w.u32(static_cast<uint32_t>(g.ny));
    w.f64(g.lx);
    w.f64(g.ly);
    w.u8(g.bc == Bc::periodic ? 0 : 1);
    w.u32(count);
}

struct Header {
    uint8_t kind = 0;
    GridPtr grid;
    uint32_t count = 0;
};

inline Header read_header(ByteReader& r, uint8_t expected_kind) {
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "TRRM", 4) != 0) throw CodecError("bad magic");
    const uint32_t version = r.u32();
    if (version != 1) throw CodecError("unsupported version " + std::to_string(version));
    Header h;
    h.kind = r.u8();
    if (h.kind != expected_kind)
        throw CodecError("wrong file kind " + std::to_string(h.kind) + ", expected " +
                         std::to_string(expected_kind));
    const uint32_t nx = r.u32(), ny = r.u32();
    const double lx = r.f64(), ly = r.f64();
    const uint8_t bc = r.u8();
    if (bc > 1) throw CodecError("bad bc byte");
    h.grid = std::make_shared<Grid>(static_cast<int>(nx), static_cast<int>(ny), lx, ly,
                                    bc == 0 ? Bc::periodic : Bc::cavity);
    h.count = r.u32();
    return h;
}

inline void write_field(ByteWriter& w, const VectorField& f) {
    w.f64s(f.u);
    w.f64s(f.v);
}

inline VectorField read_field(ByteReader& r, GridPtr grid) {
    VectorField f(grid);
    r.raw(f.u.data(), f.u.size() * 8);
    r.raw(f.v.data(), f.v.size() * 8);
    return f;
}

}  // namespace detail

// ------------------------------------------------------------- snapshots (kind 1)

inline void write_snapshots(const std::string& path, const SnapshotSet& snaps) {
    detail::ByteWriter w(path);
    detail::write_header(w, 1, *snaps.grid, static_cast<uint32_t>(snaps.count()));
    w.f64s(snaps.times);
    detail::write_field(w, snaps.lift);
    for (const auto& f : snaps.fields) detail::write_field(w, f);
    if (!w.out) throw CodecError("write failed: " + path);
}

inline SnapshotSet read_snapshots(const std::string& path) {
    detail::ByteReader r(path);
    const detail::Header h = detail::read_header(r, 1);
    SnapshotSet s;
    s.grid = h.grid;
    s.times = r.f64s(h.count);
    s.lift = detail::read_field(r, h.grid);
    s.fields.reserve(h.count);
    for (uint32_t k = 0; k < h.count; ++k) s.fields.push_back(detail::read_field(r, h.grid));
    return s;
}

// ------------------------------------------------------------- basis (kind 2)

inline void write_basis(const std::string& path, const PodBasis& basis) {
    detail::ByteWriter w(path);
    detail::write_header(w, 2, *basis.grid, static_cast<uint32_t>(basis.R));
    w.f64s(basis.eigenvalues);
    w.f64s(basis.grad_norms_sq);
    detail::write_field(w, basis.lift);
    for (const auto& m : basis.modes) detail::write_field(w, m);
    if (!w.out) throw CodecError("write failed: " + path);
}

inline PodBasis read_basis(const std::string& path) {
    detail::ByteReader r(path);
    const detail::Header h = detail::read_header(r, 2);
    PodBasis b;
    b.grid = h.grid;
    b.R = static_cast<int>(h.count);
    b.eigenvalues = r.f64s(h.count);
    b.grad_norms_sq = r.f64s(h.count);
    b.lift = detail::read_field(r, h.grid);
    b.modes.reserve(h.count);
    for (uint32_t k = 0; k < h.count; ++k) b.modes.push_back(detail::read_field(r, h.grid));
    return b;
}

// ------------------------------------------------------------- trajectory (kind 3)

struct TrajectoryFile {
    GridPtr grid;
    int r = 0;
    std::vector<double> times;
    Eigen::MatrixXd coeffs;  // count x r
};

inline void write_trajectory(const std::string& path, const Trajectory& traj, const Grid& grid) {
    detail::ByteWriter w(path);
    const uint32_t count = static_cast<uint32_t>(traj.times.size());
    detail::write_header(w, 3, grid, count);
    w.u32(static_cast<uint32_t>(traj.coeffs.cols()));
    w.f64s(traj.times);
    for (uint32_t k = 0; k < count; ++k)
        for (int j = 0; j < traj.coeffs.cols(); ++j) w.f64(traj.coeffs(k, j));
    if (!w.out) throw CodecError("write failed: " + path);
}

inline TrajectoryFile read_trajectory(const std::string& path) {
    detail::ByteReader r(path);
    const detail::Header h = detail::read_header(r, 3);
    TrajectoryFile t;
    t.grid = h.grid;
    t.r = static_cast<int>(r.u32());
    t.times = r.f64s(h.count);
    t.coeffs.resize(h.count, t.r);
    for (uint32_t k = 0; k < h.count; ++k)
        for (int j = 0; j < t.r; ++j) t.coeffs(k, j) = r.f64();
    return t;
}

// ------------------------------------------------------------- results CSV

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline const char* csv_header() {
    return "r,delta,chi,eps_l2,eps_h10,eps_avg_h10,lambda_l2_tail,lambda_h10_tail,"
           "s_r_norm,scheme,status,wall_time_s";
}

inline void write_csv(std::ostream& out, std::vector<StudyRecord> records) {
    std::sort(records.begin(), records.end(), record_order);
    out << csv_header() << "\n";
    for (const auto& rec : records) {
        out << rec.r << ',' << format_g17(rec.delta) << ',' << format_g17(rec.chi) << ','
            << format_g17(rec.eps_l2) << ',' << format_g17(rec.eps_h10) << ','
            << format_g17(rec.eps_avg_h10) << ',' << format_g17(rec.lambda_l2_tail) << ','
            << format_g17(rec.lambda_h10_tail) << ',' << format_g17(rec.s_r_norm) << ','
            << rec.scheme << ',' << rec.status << ',' << format_g17(rec.wall_time_s) << "\n";
    }
}

inline void write_csv(const std::string& path, const std::vector<StudyRecord>& records) {
    std::ofstream out(path);
    if (!out) throw CodecError("cannot open for writing: " + path);
    write_csv(out, records);
}

inline std::vector<StudyRecord> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CodecError("empty CSV");
    if (line != csv_header()) throw CodecError("unexpected CSV header: " + line);
    std::vector<StudyRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.size() != 12) throw CodecError("bad CSV row: " + line);
        StudyRecord rec;
        rec.r = std::stoi(cols[0]);
        rec.delta = std::stod(cols[1]);
        rec.chi = std::stod(cols[2]);
        rec.eps_l2 = std::stod(cols[3]);
        rec.eps_h10 = std::stod(cols[4]);
        rec.eps_avg_h10 = std::stod(cols[5]);
        rec.lambda_l2_tail = std::stod(cols[6]);
        rec.lambda_h10_tail = std::stod(cols[7]);
        rec.s_r_norm = std::stod(cols[8]);
        rec.scheme = cols[9];
        rec.status = cols[10];
        rec.wall_time_s = std::stod(cols[11]);
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<StudyRecord> parse_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CodecError("cannot open for reading: " + path);
    return parse_csv(in);
}

}  // namespace trrom
