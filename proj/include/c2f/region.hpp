#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "c2f/volume.hpp"

namespace c2f {

/// The mask driving a region transform has no foreground at all; the caller
/// picks the fallback (see fixpoint's empty-mask policy).
struct EmptyMaskError : std::runtime_error {
    EmptyMaskError() : std::runtime_error("mask has no foreground voxels") {}
};

/// In-plane crop rectangle with inclusive pixel bounds.
struct Region2D {
    Axis axis{};
    int index = 0;
    int top = 0, bottom = 0, left = 0, right = 0;

    bool operator==(const Region2D&) const = default;

    int height() const { return bottom - top + 1; }
    int width() const { return right - left + 1; }

    void validate(int slice_height, int slice_width) const;
};

/// Frame margins added around a minimal box: either a fixed width per side
/// or per-side integers drawn uniformly from {lo..hi}. Random draws are
/// keyed on (seed, axis, slice index, side), so they are independent per
/// side and per slice and identical for serial and parallel traversals.
class MarginSpec {
  public:
    static MarginSpec fixed(int pixels);
    static MarginSpec random_uniform(int lo, int hi, std::uint64_t seed);

    bool is_random() const { return random_; }
    int fixed_pixels() const { return lo_; }
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    std::uint64_t seed() const { return seed_; }

    /// Margins for (axis, index) in top, bottom, left, right order.
    std::array<int, 4> draw(Axis axis, int index) const;

  private:
    MarginSpec(bool random, int lo, int hi, std::uint64_t seed);
    bool random_;
    int lo_, hi_;
    std::uint64_t seed_;
};

/// Per-slice crop rectangles over all three views; a slice with no
/// foreground has no region.
class RegionSet {
  public:
    explicit RegionSet(Dims3 dims);

    const Dims3& dims() const { return dims_; }
    const std::optional<Region2D>& at(Axis axis, int index) const;
    void set(const Region2D& region);
    std::size_t count() const;

    nlohmann::json to_json() const;
    static RegionSet from_json(const nlohmann::json& j, Dims3 dims);

  private:
    Dims3 dims_;
    std::array<std::vector<std::optional<Region2D>>, 3> per_axis_;
};

/// Smallest box covering every foreground pixel; nullopt when the slice is
/// all background.
std::optional<Region2D> min_bbox(const Slice2D& mask_slice);

/// Each side moved outward by its margin, then clamped to the slice bounds.
Region2D expand(const Region2D& region, const MarginSpec& margins,
                int slice_height, int slice_width);

/// Rectangle copy out of a full slice; the patch keeps the region's offset
/// as its origin.
Slice2D crop(const Slice2D& full_slice, const Region2D& region);

/// Inverse of crop: the patch placed at region coordinates on a zero canvas.
Slice2D paste(const Region2D& region, const Slice2D& patch, int canvas_height,
              int canvas_width);

struct CropSample {
    Region2D region;
    Slice2D patch; // original image data inside the expanded box
};

struct TransformResult {
    RegionSet regions;
    std::vector<CropSample> crops;
};

/// The input-shrinking transform: per view and slice, the minimal box of the
/// mask's foreground expanded by the margins, together with the intensity
/// crop. Slices without foreground emit nothing. Throws EmptyMaskError when
/// the mask is entirely background.
TransformResult transform_r(const Volume3D& volume, const Mask3D& mask,
                            const MarginSpec& margins);

/// Indices of the slices along `axis` whose foreground covers at least
/// `min_pixels` pixels (training slice filter).
std::vector<int> select_training_slices(const Mask3D& mask, Axis axis,
                                        int min_pixels = 100);

} // namespace c2f
