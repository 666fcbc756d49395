#include "raftsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>

#include "raftsim/spectral.hpp"

namespace raftsim {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'F', 'T', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void fail_write(const std::string& path) {
  throw InputError("cannot write " + path);
}

[[noreturn]] void fail_read(const std::string& path, const std::string& why) {
  throw SnapshotError(path + ": " + why);
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64_array(std::ofstream& out, const std::vector<double>& vals) {
  for (double v : vals) put_f64(out, v);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail_read(path, "truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::ifstream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail_read(path, "truncated data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::vector<double> get_f64_array(std::ifstream& in, std::size_t count, const std::string& path) {
  std::vector<double> vals(count);
  for (double& v : vals) {
    v = get_f64(in, path);
    if (!std::isfinite(v)) fail_read(path, "non-finite payload");
  }
  return vals;
}

struct SnapshotHeader {
  std::uint32_t kind = 0;
  double t = 0.0;
  std::uint32_t n = 0;
  double length = 0.0;
  std::uint32_t mz = 0;
  double height = 0.0;
  double u_scalar = 0.0;
  double bulk_volume = 0.0;
  double total_mass = 0.0;
};

void write_header(std::ofstream& out, const SnapshotHeader& h) {
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, h.kind);
  put_f64(out, h.t);
  put_u32(out, h.n);
  put_f64(out, h.length);
  put_u32(out, h.mz);
  put_f64(out, h.height);
  put_f64(out, h.u_scalar);
  put_f64(out, h.bulk_volume);
  put_f64(out, h.total_mass);
  put_f64(out, 0.0);
}

SnapshotHeader read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  if (!in.read(magic, sizeof(magic))) fail_read(path, "truncated header");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) fail_read(path, "not a state snapshot");
  const std::uint32_t version = get_u32(in, path);
  if (version != kVersion)
    fail_read(path, "unsupported format version " + std::to_string(version));
  SnapshotHeader h;
  h.kind = get_u32(in, path);
  h.t = get_f64(in, path);
  h.n = get_u32(in, path);
  h.length = get_f64(in, path);
  h.mz = get_u32(in, path);
  h.height = get_f64(in, path);
  h.u_scalar = get_f64(in, path);
  h.bulk_volume = get_f64(in, path);
  h.total_mass = get_f64(in, path);
  get_f64(in, path);
  return h;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) fail_write(path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(path + ": cannot open");
  return in;
}

void check_surface_geometry(const SnapshotHeader& h, const TorusGeometry& expected,
                            const std::string& path) {
  if (static_cast<int>(h.n) != expected.n || h.length != expected.length)
    fail_read(path, "grid mismatch: file has N=" + std::to_string(h.n) +
                        " L=" + format_double(h.length) + ", expected N=" +
                        std::to_string(expected.n) + " L=" + format_double(expected.length));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_pgm(const SurfaceField& f, const std::string& path) {
  if (!f.finite()) throw InputError("cannot render a non-finite field to " + path);
  const std::vector<double>& vals = f.values();
  const int n = f.n();
  double lo = vals[0];
  double hi = vals[0];
  for (double v : vals) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::ofstream out = open_out(path, std::ios::binary);
  out << "P5\n"
      << "# min=" << format_double(lo) << " max=" << format_double(hi) << "\n"
      << n << " " << n << "\n"
      << "65535\n";
  const double span = hi - lo;
  std::vector<unsigned char> rowbuf(static_cast<std::size_t>(n) * 2);
  for (int r = 0; r < n; ++r) {
    const int i2 = n - 1 - r;
    for (int i1 = 0; i1 < n; ++i1) {
      double v = vals[static_cast<std::size_t>(i2) * n + i1];
      long pix = 0;
      if (span > 0.0) pix = std::lround((v - lo) / span * 65535.0);
      pix = std::clamp(pix, 0L, 65535L);
      rowbuf[2 * i1] = static_cast<unsigned char>(pix >> 8);
      rowbuf[2 * i1 + 1] = static_cast<unsigned char>(pix & 0xff);
    }
    out.write(reinterpret_cast<const char*>(rowbuf.data()),
              static_cast<std::streamsize>(rowbuf.size()));
  }
  out.flush();
  if (!out) fail_write(path);
}

std::pair<double, double> read_pgm_range(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != "P5") throw InputError(path + ": not a binary PGM");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    double lo = 0.0;
    double hi = 0.0;
    if (std::sscanf(line.c_str(), "# min=%lf max=%lf", &lo, &hi) == 2) return {lo, hi};
  }
  throw InputError(path + ": no range comment found");
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), path_(path), width_(columns.size()) {
  if (!out_) fail_write(path);
  if (columns.empty()) throw ConfigError("CSV needs at least one column");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_)
    throw ConfigError("CSV row width " + std::to_string(values.size()) + " does not match header " +
                      std::to_string(width_));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw ConfigError("CSV row width " + std::to_string(cells.size()) + " does not match header " +
                      std::to_string(width_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  if (!open_) return;
  open_ = false;
  out_.flush();
  out_.close();
  if (out_.fail()) fail_write(path_);
}

void write_snapshot(const std::string& path, const FullState& st) {
  const SlabGeometry& sg = st.u.geometry();
  if (sg.base != st.phi.geometry())
    throw ConfigError("bulk and surface grids disagree in the state to snapshot");
  SnapshotHeader h;
  h.kind = kSnapshotFull;
  h.t = st.t;
  h.n = static_cast<std::uint32_t>(sg.base.n);
  h.length = sg.base.length;
  h.mz = static_cast<std::uint32_t>(sg.mz);
  h.height = sg.height;
  std::ofstream out = open_out(path, std::ios::binary);
  write_header(out, h);
  put_f64_array(out, st.u.sample_grid(sg.mz));
  put_f64_array(out, st.phi.values());
  put_f64_array(out, st.v.values());
  out.flush();
  if (!out) fail_write(path);
}

void write_snapshot(const std::string& path, const ReducedState& st) {
  const TorusGeometry& g = st.phi.geometry();
  SnapshotHeader h;
  h.kind = kSnapshotReduced;
  h.t = st.t;
  h.n = static_cast<std::uint32_t>(g.n);
  h.length = g.length;
  h.u_scalar = st.u;
  h.bulk_volume = st.bulk_volume;
  std::ofstream out = open_out(path, std::ios::binary);
  write_header(out, h);
  put_f64_array(out, st.phi.values());
  put_f64_array(out, st.v.values());
  out.flush();
  if (!out) fail_write(path);
}

void write_snapshot(const std::string& path, const OKState& st) {
  const TorusGeometry& g = st.phi.geometry();
  SnapshotHeader h;
  h.kind = kSnapshotLimit;
  h.t = st.t;
  h.n = static_cast<std::uint32_t>(g.n);
  h.length = g.length;
  h.u_scalar = st.u;
  h.bulk_volume = st.bulk_volume;
  h.total_mass = st.total_mass;
  std::ofstream out = open_out(path, std::ios::binary);
  write_header(out, h);
  put_f64_array(out, st.phi.values());
  out.flush();
  if (!out) fail_write(path);
}

int snapshot_kind(const std::string& path) {
  std::ifstream in = open_in(path);
  return static_cast<int>(read_header(in, path).kind);
}

FullState read_full_snapshot(const std::string& path, const SlabGeometry& expected) {
  std::ifstream in = open_in(path);
  const SnapshotHeader h = read_header(in, path);
  if (h.kind != kSnapshotFull) fail_read(path, "snapshot does not hold a coupled state");
  check_surface_geometry(h, expected.base, path);
  if (static_cast<int>(h.mz) != expected.mz || h.height != expected.height)
    fail_read(path, "slab mismatch: file has Mz=" + std::to_string(h.mz) +
                        " H=" + format_double(h.height));
  const std::size_t n2 = expected.base.size();
  FullState st;
  st.t = h.t;
  std::vector<double> usamp = get_f64_array(in, n2 * static_cast<std::size_t>(expected.mz), path);
  st.u = BulkField::from_samples(expected, usamp);
  st.phi = SurfaceField::from_values(expected.base, get_f64_array(in, n2, path));
  st.v = SurfaceField::from_values(expected.base, get_f64_array(in, n2, path));
  return st;
}

ReducedState read_reduced_snapshot(const std::string& path, const TorusGeometry& expected) {
  std::ifstream in = open_in(path);
  const SnapshotHeader h = read_header(in, path);
  if (h.kind != kSnapshotReduced) fail_read(path, "snapshot does not hold a reduced state");
  check_surface_geometry(h, expected, path);
  ReducedState st;
  st.t = h.t;
  st.u = h.u_scalar;
  st.bulk_volume = h.bulk_volume;
  st.phi = SurfaceField::from_values(expected, get_f64_array(in, expected.size(), path));
  st.v = SurfaceField::from_values(expected, get_f64_array(in, expected.size(), path));
  return st;
}

OKState read_ok_snapshot(const std::string& path, const TorusGeometry& expected) {
  std::ifstream in = open_in(path);
  const SnapshotHeader h = read_header(in, path);
  if (h.kind != kSnapshotLimit) fail_read(path, "snapshot does not hold a limit-model state");
  check_surface_geometry(h, expected, path);
  OKState st;
  st.t = h.t;
  st.u = h.u_scalar;
  st.bulk_volume = h.bulk_volume;
  st.total_mass = h.total_mass;
  st.phi = SurfaceField::from_values(expected, get_f64_array(in, expected.size(), path));
  return st;
}

}  // namespace raftsim
