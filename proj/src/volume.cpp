#include "c2f/volume.hpp"

#include <sstream>
#include <stdexcept>
#include <utility>

namespace c2f {

const char* axis_name(Axis axis) {
    switch (axis) {
    case Axis::Coronal: return "coronal";
    case Axis::Sagittal: return "sagittal";
    default: return "axial";
    }
}

std::string Dims3::to_string() const {
    std::ostringstream os;
    os << w << "x" << h << "x" << l;
    return os.str();
}

namespace {

void check_dims(const Dims3& dims) {
    if (dims.w < 1 || dims.h < 1 || dims.l < 1) {
        throw std::invalid_argument("volume dims must be >= 1, got " +
                                    dims.to_string());
    }
}

void check_mask_values(std::span<const float> data, MaskMode mode) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        float v = data[i];
        if (mode == MaskMode::Binary) {
            if (v != 0.0f && v != 1.0f) {
                throw std::invalid_argument(
                    "binary mask voxel " + std::to_string(i) +
                    " is not in {0,1}: " + std::to_string(v));
            }
        } else if (!(v >= 0.0f && v <= 1.0f)) {
            throw std::invalid_argument(
                "probability mask voxel " + std::to_string(i) +
                " is outside [0,1]: " + std::to_string(v));
        }
    }
}

} // namespace

Slice2D::Slice2D(Axis axis, int index, int height, int width,
                 std::vector<float> data, int row_origin, int col_origin)
    : axis_(axis), index_(index), height_(height), width_(width),
      row_origin_(row_origin), col_origin_(col_origin),
      data_(std::move(data)) {
    if (height_ < 1 || width_ < 1) {
        throw std::invalid_argument("slice dims must be >= 1");
    }
    if (data_.size() != static_cast<std::size_t>(height_) * width_) {
        throw std::invalid_argument(
            "slice data length " + std::to_string(data_.size()) +
            " does not match " + std::to_string(height_) + "x" +
            std::to_string(width_));
    }
    if (index_ < 0) {
        throw std::invalid_argument("slice index must be >= 0");
    }
}

Slice2D Slice2D::zeros(Axis axis, int index, int height, int width) {
    return Slice2D(axis, index, height, width,
                   std::vector<float>(
                       static_cast<std::size_t>(height) * width, 0.0f));
}

std::size_t Slice2D::foreground_count() const {
    std::size_t n = 0;
    for (float v : data_) n += (v >= kBinaryThreshold);
    return n;
}

bool Slice2D::is_binary() const {
    for (float v : data_) {
        if (v != 0.0f && v != 1.0f) return false;
    }
    return true;
}

Volume3D::Volume3D(Dims3 dims, Spacing3 spacing, std::vector<float> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    check_dims(dims_);
    if (spacing_.sx <= 0 || spacing_.sy <= 0 || spacing_.sz <= 0) {
        throw std::invalid_argument("voxel spacing must be positive");
    }
    if (data_.size() != dims_.voxel_count()) {
        throw std::invalid_argument(
            "volume data length " + std::to_string(data_.size()) +
            " does not equal " + dims_.to_string());
    }
}

Mask3D::Mask3D(Dims3 dims, MaskMode mode, std::vector<float> data)
    : dims_(dims), mode_(mode), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != dims_.voxel_count()) {
        throw std::invalid_argument(
            "mask data length " + std::to_string(data_.size()) +
            " does not equal " + dims_.to_string());
    }
    check_mask_values(data_, mode_);
}

Mask3D Mask3D::zeros(Dims3 dims, MaskMode mode) {
    return Mask3D(dims, mode, std::vector<float>(dims.voxel_count(), 0.0f));
}

std::uint64_t Mask3D::foreground_count() const {
    std::uint64_t n = 0;
    for (float v : data_) n += (v >= kBinaryThreshold);
    return n;
}

namespace {

void check_slice_index(const Dims3& dims, Axis axis, int index) {
    int extent = dims.extent(axis);
    if (index < 0 || index >= extent) {
        std::ostringstream os;
        os << axis_name(axis) << " slice index " << index
           << " out of range [0, " << extent << ")";
        throw std::out_of_range(os.str());
    }
}

template <typename Grid>
Slice2D extract(const Grid& grid, Axis axis, int index) {
    check_slice_index(grid.dims(), axis, index);
    auto [rows, cols] = grid.dims().plane_dims(axis);
    std::vector<float> out(static_cast<std::size_t>(rows) * cols);
    std::size_t k = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c, ++k) {
            switch (axis) {
            case Axis::Coronal: out[k] = grid.at(index, r, c); break;
            case Axis::Sagittal: out[k] = grid.at(r, index, c); break;
            default: out[k] = grid.at(r, c, index); break;
            }
        }
    }
    return Slice2D(axis, index, rows, cols, std::move(out));
}

// Validates the stack preconditions and returns canonical-order voxels.
std::pair<Dims3, std::vector<float>>
assemble(const std::vector<Slice2D>& slices, Axis axis) {
    if (slices.empty()) {
        throw std::invalid_argument("stack: no slices given");
    }
    const Slice2D& first = slices.front();
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const Slice2D& s = slices[i];
        if (s.axis() != axis) {
            throw std::invalid_argument(
                std::string("stack: slice axis ") + axis_name(s.axis()) +
                " does not match " + axis_name(axis));
        }
        if (s.index() != static_cast<int>(i)) {
            throw std::invalid_argument(
                "stack: expected slice index " + std::to_string(i) +
                ", got " + std::to_string(s.index()));
        }
        if (s.height() != first.height() || s.width() != first.width()) {
            throw std::invalid_argument(
                "stack: slice " + std::to_string(i) + " dims " +
                std::to_string(s.height()) + "x" + std::to_string(s.width()) +
                " differ from " + std::to_string(first.height()) + "x" +
                std::to_string(first.width()));
        }
        if (s.row_origin() != 0 || s.col_origin() != 0) {
            throw std::invalid_argument(
                "stack: slice " + std::to_string(i) +
                " is a crop, not a full plane");
        }
    }
    int n = static_cast<int>(slices.size());
    Dims3 dims;
    switch (axis) {
    case Axis::Coronal: dims = {n, first.height(), first.width()}; break;
    case Axis::Sagittal: dims = {first.height(), n, first.width()}; break;
    default: dims = {first.height(), first.width(), n}; break;
    }
    std::vector<float> data(dims.voxel_count());
    for (int i = 0; i < n; ++i) {
        const Slice2D& s = slices[i];
        for (int r = 0; r < s.height(); ++r) {
            for (int c = 0; c < s.width(); ++c) {
                switch (axis) {
                case Axis::Coronal: data[dims.index(i, r, c)] = s.at(r, c); break;
                case Axis::Sagittal: data[dims.index(r, i, c)] = s.at(r, c); break;
                default: data[dims.index(r, c, i)] = s.at(r, c); break;
                }
            }
        }
    }
    return {dims, std::move(data)};
}

} // namespace

Slice2D slice(const Volume3D& volume, Axis axis, int index) {
    return extract(volume, axis, index);
}

Slice2D slice(const Mask3D& mask, Axis axis, int index) {
    return extract(mask, axis, index);
}

Volume3D stack_volume(const std::vector<Slice2D>& slices, Axis axis,
                      Spacing3 spacing) {
    auto [dims, data] = assemble(slices, axis);
    return Volume3D(dims, spacing, std::move(data));
}

Mask3D stack_mask(const std::vector<Slice2D>& slices, Axis axis,
                  MaskMode mode) {
    auto [dims, data] = assemble(slices, axis);
    return Mask3D(dims, mode, std::move(data));
}

Mask3D binarize(const Mask3D& mask, double threshold) {
    std::vector<float> out(mask.data().begin(), mask.data().end());
    for (float& v : out) v = (v >= threshold) ? 1.0f : 0.0f;
    return Mask3D(mask.dims(), MaskMode::Binary, std::move(out));
}

Slice2D binarize(const Slice2D& probabilities, double threshold) {
    std::vector<float> out(probabilities.data().begin(),
                           probabilities.data().end());
    for (float& v : out) v = (v >= threshold) ? 1.0f : 0.0f;
    return Slice2D(probabilities.axis(), probabilities.index(),
                   probabilities.height(), probabilities.width(),
                   std::move(out), probabilities.row_origin(),
                   probabilities.col_origin());
}

} // namespace c2f
