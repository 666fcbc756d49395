#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "raftsim/dynamics_full.hpp"
#include "raftsim/dynamics_ok.hpp"
#include "raftsim/dynamics_reduced.hpp"
#include "raftsim/fields.hpp"

namespace raftsim {

// 16-bit binary PGM (P5, maxval 65535, big-endian samples).  Values map
// linearly from [min, max] onto [0, 65535]; the actual range is recorded in
// the comment line "# min=<v> max=<v>" with enough digits to round-trip a
// double exactly, so the image plus its comment reproduces the field up to
// quantization.  A constant field renders as a uniform zero image with
// min = max.  Image row r holds grid row i2 = N-1-r so the y axis points up.
void emit_pgm(const SurfaceField& f, const std::string& path);

// Range recorded in the comment line of a PGM written by emit_pgm, parsed
// back at full precision.
std::pair<double, double> read_pgm_range(const std::string& path);

// Helper shared by all text emitters: shortest %.17g rendering, which
// round-trips any finite double exactly and is locale-independent here
// because the process stays in the "C" locale.
std::string format_double(double v);

// Line-buffered CSV emission: one header row, then rows of doubles printed
// with format_double so repeated runs of a deterministic simulation produce
// byte-identical files.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  ~CsvWriter();

  void row(const std::vector<double>& values);
  // Free-form row for string-valued cells (fit summaries); the cell count
  // must still match the header.
  void row_text(const std::vector<std::string>& cells);
  // Flush and close; throws on a failed stream.  Called by the destructor
  // with errors swallowed, so call it directly when diagnostics matter.
  void close();

  const std::string& path() const { return path_; }

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t width_ = 0;
  bool open_ = true;
};

// State snapshots: little-endian binary dumps, one state per file.
//
//   bytes 0..7   magic "RAFTSNAP"
//   u32          format version (1)
//   u32          state kind: 0 coupled bulk-surface, 1 reduced, 2 limit
//   f64          time t
//   u32, f64     N, L of the horizontal grid
//   u32, f64     Mz, H of the slab (0, 0 for surface-only states)
//   f64 x 4      u scalar, bulk volume, total mass, reserved
//   payload      f64 arrays, row-major as in SurfaceField::values():
//                  kind 0: bulk samples at Mz vertical midpoints (Mz*N*N),
//                          then phi (N*N), then v (N*N)
//                  kind 1: phi, then v
//                  kind 2: phi
//
// Bulk samples at exactly Mz midpoint levels determine the cosine
// coefficients exactly, so a write/read round trip reproduces the state to
// rounding error.  Readers check magic, version, kind, and geometry and
// throw SnapshotError on any mismatch or on non-finite payload data.

constexpr int kSnapshotFull = 0;
constexpr int kSnapshotReduced = 1;
constexpr int kSnapshotLimit = 2;

void write_snapshot(const std::string& path, const FullState& st);
void write_snapshot(const std::string& path, const ReducedState& st);
void write_snapshot(const std::string& path, const OKState& st);

// Kind tag of the snapshot at path (one of the constants above).
int snapshot_kind(const std::string& path);

FullState read_full_snapshot(const std::string& path, const SlabGeometry& expected);
ReducedState read_reduced_snapshot(const std::string& path, const TorusGeometry& expected);
OKState read_ok_snapshot(const std::string& path, const TorusGeometry& expected);

}  // namespace raftsim
