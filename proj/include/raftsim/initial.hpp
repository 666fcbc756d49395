#pragma once

#include <cstdint>

#include "raftsim/fields.hpp"

namespace raftsim {

// Initial-data builders.
//
// "noise" fields are a constant plus seeded uniform noise per grid point;
// they are reproducible for a fixed (seed, stream) but grid-dependent.
// "smooth" fields are fixed band-limited analytic profiles (modes of index
// <= 2 in units of the box), identical across resolutions, which makes them
// suitable for refinement studies and integrator comparisons.

SurfaceField ic_surface_noise(const TorusGeometry& g, double mean, double amp, std::uint64_t seed,
                              std::uint64_t stream);
SurfaceField ic_surface_smooth(const TorusGeometry& g, double mean, double amp);

BulkField ic_bulk_noise(const SlabGeometry& s, double mean, double amp, std::uint64_t seed,
                        std::uint64_t stream);
BulkField ic_bulk_smooth(const SlabGeometry& s, double mean, double amp);

// v slaved to phi: v = (1 + phi)/2 + shift, with the constant shift chosen
// so that int_G v = v_total.  This starts the relaxation variable at its
// local equilibrium, which keeps initial data well-prepared uniformly in
// delta.
SurfaceField slaved_v(const SurfaceField& phi, double v_total);

}  // namespace raftsim
