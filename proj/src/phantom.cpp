#include "c2f/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "c2f/rng.hpp"

namespace c2f {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Base anisotropy of derived ellipsoids; the product is 1 so the scale
// factor alone fixes the volume.
constexpr std::array<double, 3> kAnisotropy{1.25, 1.0, 0.8};

} // namespace

Phantom gen_phantom(const PhantomSpec& spec) {
    if (spec.dims.w < 1 || spec.dims.h < 1 || spec.dims.l < 1) {
        throw std::invalid_argument("phantom dims must be >= 1");
    }
    if (!(spec.target_fraction > 0.0 && spec.target_fraction <= 0.05)) {
        throw std::invalid_argument(
            "phantom target fraction must lie in (0, 0.05]");
    }
    if (spec.noise_sigma < 0.0) {
        throw std::invalid_argument("phantom noise sigma must be >= 0");
    }

    const auto voxels = static_cast<double>(spec.dims.voxel_count());
    std::array<double, 3> center = spec.center.value_or(std::array<double, 3>{
        (spec.dims.w - 1) / 2.0, (spec.dims.h - 1) / 2.0,
        (spec.dims.l - 1) / 2.0});

    std::array<double, 3> radii;
    bool derived = !spec.radii.has_value();
    if (derived) {
        double r = std::cbrt(3.0 * spec.target_fraction * voxels / (4.0 * kPi));
        for (int i = 0; i < 3; ++i) radii[i] = kAnisotropy[i] * r;
    } else {
        radii = *spec.radii;
        for (double r : radii) {
            if (!(r > 0.0)) {
                throw std::invalid_argument("phantom radii must be positive");
            }
        }
    }

    const double extents[3] = {static_cast<double>(spec.dims.w - 1),
                               static_cast<double>(spec.dims.h - 1),
                               static_cast<double>(spec.dims.l - 1)};
    for (int i = 0; i < 3; ++i) {
        if (center[i] - radii[i] < 0.0 || center[i] + radii[i] > extents[i]) {
            throw std::invalid_argument(
                "phantom ellipsoid does not fit inside the volume (axis " +
                std::to_string(i) + ": center " + std::to_string(center[i]) +
                ", radius " + std::to_string(radii[i]) + ")");
        }
    }

    std::vector<float> mask_data(spec.dims.voxel_count(), 0.0f);
    std::size_t fg = 0;
    std::size_t k = 0;
    for (int w = 0; w < spec.dims.w; ++w) {
        double dw = (w - center[0]) / radii[0];
        for (int h = 0; h < spec.dims.h; ++h) {
            double dh = (h - center[1]) / radii[1];
            for (int l = 0; l < spec.dims.l; ++l, ++k) {
                double dl = (l - center[2]) / radii[2];
                if (dw * dw + dh * dh + dl * dl <= 1.0) {
                    mask_data[k] = 1.0f;
                    ++fg;
                }
            }
        }
    }

    if (derived) {
        double actual = static_cast<double>(fg) / voxels;
        if (std::abs(actual - spec.target_fraction) >
            0.2 * spec.target_fraction) {
            throw std::runtime_error(
                "phantom foreground fraction " + std::to_string(actual) +
                " misses target " + std::to_string(spec.target_fraction) +
                " by more than 20%");
        }
    }

    rng::Stream noise(spec.seed);
    std::vector<float> intensity(spec.dims.voxel_count());
    for (std::size_t i = 0; i < intensity.size(); ++i) {
        double mean = mask_data[i] != 0.0f ? spec.fg_mean : spec.bg_mean;
        double value = mean;
        if (spec.noise_sigma > 0.0) {
            value += spec.noise_sigma * noise.gaussian();
        }
        intensity[i] = static_cast<float>(value);
    }

    return Phantom{Volume3D(spec.dims, {}, std::move(intensity)),
                   Mask3D(spec.dims, MaskMode::Binary, std::move(mask_data))};
}

std::vector<PhantomSpec> phantom_family(const PhantomSpec& base, int count) {
    if (count < 1) {
        throw std::invalid_argument("phantom family count must be >= 1");
    }
    std::vector<PhantomSpec> specs;
    specs.reserve(count);
    for (int i = 0; i < count; ++i) {
        rng::Stream stream(rng::mix(base.seed, static_cast<std::uint64_t>(i)));
        PhantomSpec s = base;
        s.seed = stream.next();
        s.radii.reset();
        // Volume scale in [0.85, 1.15]; fractions stay near the base target.
        s.target_fraction = base.target_fraction * (0.85 + 0.30 * stream.unit());

        double r = std::cbrt(3.0 * s.target_fraction *
                             static_cast<double>(s.dims.voxel_count()) /
                             (4.0 * kPi));
        double max_radius = r * 1.45; // anisotropy 1.25 plus jitter headroom
        std::array<double, 3> center;
        const double extents[3] = {static_cast<double>(s.dims.w - 1),
                                   static_cast<double>(s.dims.h - 1),
                                   static_cast<double>(s.dims.l - 1)};
        for (int a = 0; a < 3; ++a) {
            double lo = max_radius + 1.0;
            double hi = extents[a] - max_radius - 1.0;
            if (hi < lo) {
                throw std::invalid_argument(
                    "phantom family: volume too small for the target size");
            }
            double mid = extents[a] / 2.0;
            double jitter = std::min(mid - lo, hi - mid) * 0.5;
            center[a] = mid + (2.0 * stream.unit() - 1.0) * jitter;
        }
        s.center = center;
        specs.push_back(s);
    }
    return specs;
}

} // namespace c2f
