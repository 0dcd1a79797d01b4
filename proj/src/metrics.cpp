#include "c2f/metrics.hpp"

#include <string>

namespace c2f {

namespace {

void check_same_size(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("voxel counts differ: " +
                                    std::to_string(a) + " vs " +
                                    std::to_string(b));
    }
}

void check_binary(std::span<const float> v, const char* which) {
    for (float x : v) {
        if (x != 0.0f && x != 1.0f) {
            throw std::invalid_argument(std::string(which) +
                                        " must be binary");
        }
    }
}

void check_probability(std::span<const float> v) {
    for (float x : v) {
        if (!(x >= 0.0f && x <= 1.0f)) {
            throw std::invalid_argument("prediction must lie in [0,1]");
        }
    }
}

struct Sums {
    double z = 0, y = 0, zy = 0;
};

Sums accumulate(std::span<const float> z, std::span<const float> y) {
    Sums s;
    for (std::size_t i = 0; i < z.size(); ++i) {
        s.z += z[i];
        s.y += y[i];
        s.zy += static_cast<double>(z[i]) * y[i];
    }
    return s;
}

} // namespace

double dsc(std::span<const float> a, std::span<const float> b) {
    check_same_size(a.size(), b.size());
    check_binary(a, "dsc input a");
    check_binary(b, "dsc input b");
    Sums s = accumulate(a, b);
    if (s.z + s.y == 0.0) return 1.0; // both empty: nothing to disagree on
    return 2.0 * s.zy / (s.z + s.y);
}

double dsc(const Mask3D& a, const Mask3D& b) {
    if (a.dims() != b.dims()) {
        throw std::invalid_argument("dsc: mask dims " + a.dims().to_string() +
                                    " vs " + b.dims().to_string());
    }
    return dsc(a.data(), b.data());
}

double soft_dsc_loss(std::span<const float> z, std::span<const float> y) {
    check_same_size(z.size(), y.size());
    check_probability(z);
    check_binary(y, "target y");
    Sums s = accumulate(z, y);
    if (s.z + s.y == 0.0) throw DegenerateInputError();
    return 1.0 - 2.0 * s.zy / (s.z + s.y);
}

double soft_dsc_loss(const Mask3D& z, const Mask3D& y) {
    if (z.dims() != y.dims()) {
        throw std::invalid_argument("soft_dsc_loss: mask dims " +
                                    z.dims().to_string() + " vs " +
                                    y.dims().to_string());
    }
    return soft_dsc_loss(z.data(), y.data());
}

GradientField soft_dsc_gradient(std::span<const float> z,
                                std::span<const float> y) {
    check_same_size(z.size(), y.size());
    check_probability(z);
    check_binary(y, "target y");
    Sums s = accumulate(z, y);
    double denom = s.z + s.y;
    if (denom == 0.0) throw DegenerateInputError();
    GradientField grad(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        grad[j] = -2.0 * (y[j] * denom - s.zy) / (denom * denom);
    }
    return grad;
}

double inter_iteration_dsc(const Mask3D& previous, const Mask3D& current) {
    if (previous.mode() != MaskMode::Binary ||
        current.mode() != MaskMode::Binary) {
        throw std::invalid_argument("inter_iteration_dsc needs binary masks");
    }
    return dsc(previous, current);
}

} // namespace c2f
