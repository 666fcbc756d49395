#pragma once

#include <cstdint>
#include <string>

#include "raftsim/exchange.hpp"
#include "raftsim/fields.hpp"
#include "raftsim/model.hpp"

namespace raftsim {

// Which system a run integrates (or solves, for the stationary problem).
enum class ModelKind { Full, Reduced, OK, Stationary };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct GeometryConfig {
  double L = 1.0;
  int N = 64;
  double H = 1.0;
  int Mz = 16;

  bool operator==(const GeometryConfig&) const = default;

  TorusGeometry torus() const { return TorusGeometry(N, L); }
  SlabGeometry slab() const { return SlabGeometry(torus(), H, Mz); }
  double surface_area() const { return L * L; }
  double bulk_volume() const { return L * L * H; }
};

// Initial data: either seeded noise about a constant, or a state snapshot.
//   phi_mean   surface average of the order parameter
//   noise_amp  uniform noise amplitude on phi (smooth-profile amplitude in
//              refinement studies, which use band-limited data instead)
//   seed       noise seed; the generator is std::mt19937_64 with a fixed
//              53-bit mapping, so runs reproduce across platforms
//   u0         initial bulk density (spatially constant)
//   snapshot   when non-empty, the state is loaded from this file and the
//              noise fields are ignored
struct InitialConfig {
  double phi_mean = -0.4;
  double noise_amp = 0.05;
  std::uint64_t seed = 42;
  double u0 = 0.5;
  std::string snapshot;

  bool operator==(const InitialConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  // Snapshot cadence in steps; k > 0 writes at every step divisible by k
  // plus the final step, 0 disables numbered snapshots (the final state file
  // is always written).
  long snapshot_every = 0;
  // Time-series cadence in steps; rows at step 0, every csv_every steps,
  // and the final step.
  long csv_every = 1;

  bool operator==(const OutputConfig&) const = default;
};

struct StationarySolverConfig {
  double tol = 1e-9;
  double alpha = 0.5;
  int max_iters = 2000;

  bool operator==(const StationarySolverConfig&) const = default;
};

// One run, fully specified.  Defaults reproduce the reference configuration
// used throughout the test suite: L=1, N=64, H=1, Mz=16, eps=0.04,
// delta=0.1, dt=1e-4, plain non-equilibrium law with c1=c2=1, total mass 1,
// phi average -0.4, noise 0.05, seed 42.
struct RunConfig {
  ModelKind model = ModelKind::Full;
  GeometryConfig geometry;
  ModelParams params;
  ExchangeLaw law = NonEquilibriumLaw{1.0, 1.0};
  InitialConfig initial;
  double total_mass = 1.0;
  OutputConfig output;
  StationarySolverConfig stationary;

  bool operator==(const RunConfig&) const = default;

  long steps() const;

  // Collects every violation and throws one ConfigError whose message lists
  // them all, one per line.
  void validate() const;
};

// JSON round trip.  parse_config(emit_config(c)) == c for any valid config;
// unknown keys are rejected so typos surface as errors rather than silently
// falling back to defaults.  Missing keys take the defaults above.
RunConfig parse_config(const std::string& json_text);
std::string emit_config(const RunConfig& c);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

}  // namespace raftsim
