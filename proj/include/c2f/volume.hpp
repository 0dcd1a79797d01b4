#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace c2f {

/// Slicing directions of a 3D scan. The canonical memory order of a volume is
/// (coronal index, sagittal index, axial index) with the axial index fastest.
enum class Axis : int { Coronal = 0, Sagittal = 1, Axial = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::Coronal, Axis::Sagittal,
                                              Axis::Axial};

const char* axis_name(Axis axis);

/// Probability >= 0.5 counts as foreground everywhere in this codebase.
inline constexpr double kBinaryThreshold = 0.5;

struct Dims3 {
    int w = 0; ///< coronal extent (W)
    int h = 0; ///< sagittal extent (H)
    int l = 0; ///< axial extent (L)

    bool operator==(const Dims3&) const = default;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(w) * h * l;
    }

    int extent(Axis axis) const {
        switch (axis) {
        case Axis::Coronal: return w;
        case Axis::Sagittal: return h;
        default: return l;
        }
    }

    /// In-plane (rows, cols) of a slice perpendicular to `axis`:
    /// coronal slices are H x L, sagittal W x L, axial W x H.
    std::pair<int, int> plane_dims(Axis axis) const {
        switch (axis) {
        case Axis::Coronal: return {h, l};
        case Axis::Sagittal: return {w, l};
        default: return {w, h};
        }
    }

    std::size_t index(int wi, int hi, int li) const {
        return (static_cast<std::size_t>(wi) * h + hi) * l + li;
    }

    std::string to_string() const;
};

struct Spacing3 {
    double sx = 1.0, sy = 1.0, sz = 1.0; // millimeters per voxel
    bool operator==(const Spacing3&) const = default;
};

/// A planar cross-section of a volume or mask. Row/col follow the
/// plane_dims() convention above. `row_origin`/`col_origin` locate the slice
/// within its parent plane; full slices sit at (0, 0) and crops carry the
/// offset of their region so positional noise fields stay crop-invariant.
class Slice2D {
  public:
    Slice2D(Axis axis, int index, int height, int width,
            std::vector<float> data, int row_origin = 0, int col_origin = 0);

    static Slice2D zeros(Axis axis, int index, int height, int width);

    Axis axis() const { return axis_; }
    int index() const { return index_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int row_origin() const { return row_origin_; }
    int col_origin() const { return col_origin_; }

    float at(int r, int c) const {
        return data_[static_cast<std::size_t>(r) * width_ + c];
    }
    std::span<const float> data() const { return data_; }

    std::size_t foreground_count() const; // values >= kBinaryThreshold
    bool is_binary() const;

  private:
    Axis axis_;
    int index_;
    int height_, width_;
    int row_origin_, col_origin_;
    std::vector<float> data_;
};

/// Scalar intensity volume, immutable after construction.
class Volume3D {
  public:
    Volume3D(Dims3 dims, Spacing3 spacing, std::vector<float> data);

    const Dims3& dims() const { return dims_; }
    const Spacing3& spacing() const { return spacing_; }
    float at(int w, int h, int l) const { return data_[dims_.index(w, h, l)]; }
    std::span<const float> data() const { return data_; }

  private:
    Dims3 dims_;
    Spacing3 spacing_;
    std::vector<float> data_;
};

enum class MaskMode { Binary, Probability };

/// Segmentation volume aligned with a Volume3D. Binary masks hold exactly
/// {0, 1}; probability masks hold [0, 1].
class Mask3D {
  public:
    Mask3D(Dims3 dims, MaskMode mode, std::vector<float> data);

    static Mask3D zeros(Dims3 dims, MaskMode mode = MaskMode::Binary);

    const Dims3& dims() const { return dims_; }
    MaskMode mode() const { return mode_; }
    float at(int w, int h, int l) const { return data_[dims_.index(w, h, l)]; }
    std::span<const float> data() const { return data_; }

    std::uint64_t foreground_count() const;
    bool empty_foreground() const { return foreground_count() == 0; }

  private:
    Dims3 dims_;
    MaskMode mode_;
    std::vector<float> data_;
};

/// Planar cross-section at `index` along `axis`; throws std::out_of_range
/// naming the axis and extent when the index is invalid.
Slice2D slice(const Volume3D& volume, Axis axis, int index);
Slice2D slice(const Mask3D& mask, Axis axis, int index);

/// Inverse of slicing: slices must share axis and in-plane dims and be
/// ordered 0..extent-1 with no gaps, else std::invalid_argument.
Volume3D stack_volume(const std::vector<Slice2D>& slices, Axis axis,
                      Spacing3 spacing = {});
Mask3D stack_mask(const std::vector<Slice2D>& slices, Axis axis,
                  MaskMode mode);

Mask3D binarize(const Mask3D& mask, double threshold = kBinaryThreshold);
Slice2D binarize(const Slice2D& probabilities,
                 double threshold = kBinaryThreshold);

} // namespace c2f
