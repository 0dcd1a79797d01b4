#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "c2f/volume.hpp"

namespace c2f {

/// Loss inputs sum to zero, so the overlap loss is undefined.
struct DegenerateInputError : std::invalid_argument {
    DegenerateInputError()
        : std::invalid_argument(
              "soft DSC is undefined: prediction and target both sum to 0") {}
};

/// Per-element derivative of the soft DSC loss w.r.t. the prediction.
using GradientField = std::vector<double>;

/// Hard Dice-Sorensen coefficient 2|A^B| / (|A|+|B|) over binary voxel sets.
/// Both inputs empty counts as perfect agreement (1.0). Accumulates in
/// double precision.
double dsc(std::span<const float> a, std::span<const float> b);
double dsc(const Mask3D& a, const Mask3D& b);

/// Soft overlap loss 1 - 2*sum(z*y) / (sum(z) + sum(y)) for a probabilistic
/// prediction z against a binary target y. Coincides with 1 - dsc(z, y) when
/// z is binary. Throws DegenerateInputError when both sums are zero.
double soft_dsc_loss(std::span<const float> z, std::span<const float> y);
double soft_dsc_loss(const Mask3D& z, const Mask3D& y);

/// Analytic gradient of soft_dsc_loss: element j equals
/// -2 * (y_j*(sum z + sum y) - sum(z*y)) / (sum z + sum y)^2.
GradientField soft_dsc_gradient(std::span<const float> z,
                                std::span<const float> y);

/// Agreement d between two successive binary masks of the iteration loop;
/// numerically identical to dsc restricted to binary inputs.
double inter_iteration_dsc(const Mask3D& previous, const Mask3D& current);

} // namespace c2f
