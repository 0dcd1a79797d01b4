#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "c2f/volume.hpp"

namespace c2f {

/// Synthetic test volume: an ellipsoid target on a noisy background.
/// When `radii` is empty, the radii are derived from `target_fraction`
/// (mildly anisotropic, continuous ellipsoid volume = fraction * voxels)
/// and the generated mask is guaranteed to land within 20% relative of the
/// target fraction. Explicit radii are taken as-is.
struct PhantomSpec {
    Dims3 dims{64, 64, 64};
    std::optional<std::array<double, 3>> center; // voxel coords; default: volume center
    std::optional<std::array<double, 3>> radii;  // voxels
    double target_fraction = 0.005; // foreground share of the volume
    double fg_mean = 0.8;
    double bg_mean = 0.2;
    double noise_sigma = 0.05;
    std::uint64_t seed = 1;
};

struct Phantom {
    Volume3D volume;
    Mask3D truth;
};

Phantom gen_phantom(const PhantomSpec& spec);

/// A reproducible family of specs around `base`: centers jittered, target
/// volumes rescaled within ~15%, one derived noise seed each.
std::vector<PhantomSpec> phantom_family(const PhantomSpec& base, int count);

} // namespace c2f
