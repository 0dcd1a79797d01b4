#pragma once

// Shared helpers for the test suites: seeded random inputs and small
// independent oracles (finite differences, brute-force counters). Nothing
// here calls back into the code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "c2f/rng.hpp"
#include "c2f/volume.hpp"

namespace testsupport {

inline std::vector<float> random_binary(std::size_t n, c2f::rng::Stream& s,
                                        double p = 0.5) {
    std::vector<float> v(n);
    for (auto& x : v) x = s.unit() < p ? 1.0f : 0.0f;
    return v;
}

inline std::vector<float> random_unit(std::size_t n, c2f::rng::Stream& s) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(s.unit());
    return v;
}

inline c2f::Volume3D random_volume(c2f::Dims3 dims, c2f::rng::Stream& s) {
    std::vector<float> v(dims.voxel_count());
    for (auto& x : v) x = static_cast<float>(s.unit() * 200.0 - 100.0);
    return c2f::Volume3D(dims, {}, std::move(v));
}

inline c2f::Mask3D random_binary_mask(c2f::Dims3 dims, c2f::rng::Stream& s,
                                      double p = 0.5) {
    return c2f::Mask3D(dims, c2f::MaskMode::Binary,
                       random_binary(dims.voxel_count(), s, p));
}

// Central finite difference of f at x[j] with nominal step h. The inputs are
// floats, so the difference is taken over the step the storage actually
// achieved, not the requested one.
template <typename F>
double central_difference(F&& f, std::vector<float>& x, std::size_t j,
                          double h) {
    float saved = x[j];
    float up_value = static_cast<float>(saved + h);
    float down_value = static_cast<float>(saved - h);
    x[j] = up_value;
    double up = f(x);
    x[j] = down_value;
    double down = f(x);
    x[j] = saved;
    return (up - down) /
           (static_cast<double>(up_value) - static_cast<double>(down_value));
}

inline double relative_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

} // namespace testsupport
