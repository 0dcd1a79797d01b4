#include "c2f/region.hpp"

#include <algorithm>
#include <string>

#include "c2f/rng.hpp"

namespace c2f {

namespace {

constexpr std::uint64_t kMarginTag = 0x6d617267696e7331ULL;

void check_binary_slice(const Slice2D& s, const char* what) {
    if (!s.is_binary()) {
        throw std::invalid_argument(std::string(what) +
                                    " must be a binary slice");
    }
}

} // namespace

void Region2D::validate(int slice_height, int slice_width) const {
    if (!(0 <= top && top <= bottom && bottom < slice_height &&
          0 <= left && left <= right && right < slice_width)) {
        throw std::invalid_argument(
            "region (" + std::to_string(top) + "," + std::to_string(bottom) +
            "," + std::to_string(left) + "," + std::to_string(right) +
            ") invalid for " + std::to_string(slice_height) + "x" +
            std::to_string(slice_width) + " slice");
    }
}

MarginSpec::MarginSpec(bool random, int lo, int hi, std::uint64_t seed)
    : random_(random), lo_(lo), hi_(hi), seed_(seed) {
    if (lo_ < 0 || hi_ < lo_) {
        throw std::invalid_argument("margins must satisfy 0 <= lo <= hi");
    }
}

MarginSpec MarginSpec::fixed(int pixels) {
    return MarginSpec(false, pixels, pixels, 0);
}

MarginSpec MarginSpec::random_uniform(int lo, int hi, std::uint64_t seed) {
    return MarginSpec(true, lo, hi, seed);
}

std::array<int, 4> MarginSpec::draw(Axis axis, int index) const {
    if (!random_) return {lo_, lo_, lo_, lo_};
    std::uint64_t key = rng::mix(seed_, kMarginTag);
    key = rng::mix(key, static_cast<std::uint64_t>(axis));
    key = rng::mix(key, static_cast<std::uint64_t>(index));
    std::array<int, 4> m;
    auto span = static_cast<std::uint32_t>(hi_ - lo_ + 1);
    for (int side = 0; side < 4; ++side) {
        m[side] = lo_ + static_cast<int>(rng::bounded(
                            rng::mix(key, static_cast<std::uint64_t>(side)),
                            span));
    }
    return m;
}

RegionSet::RegionSet(Dims3 dims) : dims_(dims) {
    for (Axis axis : kAllAxes) {
        per_axis_[static_cast<int>(axis)].resize(dims.extent(axis));
    }
}

const std::optional<Region2D>& RegionSet::at(Axis axis, int index) const {
    const auto& v = per_axis_[static_cast<int>(axis)];
    if (index < 0 || index >= static_cast<int>(v.size())) {
        throw std::out_of_range(std::string(axis_name(axis)) +
                                " region index " + std::to_string(index) +
                                " out of range [0, " +
                                std::to_string(v.size()) + ")");
    }
    return v[index];
}

void RegionSet::set(const Region2D& region) {
    auto [rows, cols] = dims_.plane_dims(region.axis);
    region.validate(rows, cols);
    auto& v = per_axis_[static_cast<int>(region.axis)];
    if (region.index < 0 || region.index >= static_cast<int>(v.size())) {
        throw std::out_of_range("region slice index out of range");
    }
    v[region.index] = region;
}

std::size_t RegionSet::count() const {
    std::size_t n = 0;
    for (const auto& v : per_axis_) {
        for (const auto& r : v) n += r.has_value();
    }
    return n;
}

nlohmann::json RegionSet::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (Axis axis : kAllAxes) {
        for (const auto& r : per_axis_[static_cast<int>(axis)]) {
            if (!r) continue;
            arr.push_back({{"axis", axis_name(axis)},
                           {"index", r->index},
                           {"top", r->top},
                           {"bottom", r->bottom},
                           {"left", r->left},
                           {"right", r->right}});
        }
    }
    return arr;
}

RegionSet RegionSet::from_json(const nlohmann::json& j, Dims3 dims) {
    RegionSet set(dims);
    for (const auto& e : j) {
        std::string name = e.at("axis").get<std::string>();
        Axis axis;
        if (name == "coronal") axis = Axis::Coronal;
        else if (name == "sagittal") axis = Axis::Sagittal;
        else if (name == "axial") axis = Axis::Axial;
        else throw std::invalid_argument("unknown axis '" + name + "'");
        set.set(Region2D{axis, e.at("index").get<int>(),
                         e.at("top").get<int>(), e.at("bottom").get<int>(),
                         e.at("left").get<int>(), e.at("right").get<int>()});
    }
    return set;
}

std::optional<Region2D> min_bbox(const Slice2D& mask_slice) {
    check_binary_slice(mask_slice, "min_bbox input");
    int top = mask_slice.height(), bottom = -1;
    int left = mask_slice.width(), right = -1;
    for (int r = 0; r < mask_slice.height(); ++r) {
        for (int c = 0; c < mask_slice.width(); ++c) {
            if (mask_slice.at(r, c) != 0.0f) {
                top = std::min(top, r);
                bottom = std::max(bottom, r);
                left = std::min(left, c);
                right = std::max(right, c);
            }
        }
    }
    if (bottom < 0) return std::nullopt;
    return Region2D{mask_slice.axis(), mask_slice.index(), top, bottom, left,
                    right};
}

Region2D expand(const Region2D& region, const MarginSpec& margins,
                int slice_height, int slice_width) {
    region.validate(slice_height, slice_width);
    auto [mt, mb, ml, mr] = margins.draw(region.axis, region.index);
    Region2D out = region;
    out.top = std::max(0, region.top - mt);
    out.bottom = std::min(slice_height - 1, region.bottom + mb);
    out.left = std::max(0, region.left - ml);
    out.right = std::min(slice_width - 1, region.right + mr);
    return out;
}

Slice2D crop(const Slice2D& full_slice, const Region2D& region) {
    if (region.axis != full_slice.axis() ||
        region.index != full_slice.index()) {
        throw std::invalid_argument("crop: region does not address this slice");
    }
    region.validate(full_slice.height(), full_slice.width());
    std::vector<float> data(static_cast<std::size_t>(region.height()) *
                            region.width());
    std::size_t k = 0;
    for (int r = region.top; r <= region.bottom; ++r) {
        for (int c = region.left; c <= region.right; ++c, ++k) {
            data[k] = full_slice.at(r, c);
        }
    }
    return Slice2D(full_slice.axis(), full_slice.index(), region.height(),
                   region.width(), std::move(data), region.top, region.left);
}

Slice2D paste(const Region2D& region, const Slice2D& patch, int canvas_height,
              int canvas_width) {
    region.validate(canvas_height, canvas_width);
    if (patch.height() != region.height() ||
        patch.width() != region.width()) {
        throw std::invalid_argument(
            "paste: patch " + std::to_string(patch.height()) + "x" +
            std::to_string(patch.width()) + " does not match region " +
            std::to_string(region.height()) + "x" +
            std::to_string(region.width()));
    }
    std::vector<float> data(
        static_cast<std::size_t>(canvas_height) * canvas_width, 0.0f);
    for (int r = 0; r < patch.height(); ++r) {
        for (int c = 0; c < patch.width(); ++c) {
            data[static_cast<std::size_t>(region.top + r) * canvas_width +
                 region.left + c] = patch.at(r, c);
        }
    }
    return Slice2D(region.axis, region.index, canvas_height, canvas_width,
                   std::move(data));
}

TransformResult transform_r(const Volume3D& volume, const Mask3D& mask,
                            const MarginSpec& margins) {
    if (volume.dims() != mask.dims()) {
        throw std::invalid_argument("transform_r: volume dims " +
                                    volume.dims().to_string() +
                                    " vs mask dims " +
                                    mask.dims().to_string());
    }
    if (mask.mode() != MaskMode::Binary) {
        throw std::invalid_argument("transform_r needs a binary mask");
    }
    if (mask.empty_foreground()) throw EmptyMaskError();

    TransformResult out{RegionSet(volume.dims()), {}};
    for (Axis axis : kAllAxes) {
        auto [rows, cols] = volume.dims().plane_dims(axis);
        for (int i = 0; i < volume.dims().extent(axis); ++i) {
            auto box = min_bbox(slice(mask, axis, i));
            if (!box) continue;
            Region2D region = expand(*box, margins, rows, cols);
            out.regions.set(region);
            out.crops.push_back(
                CropSample{region, crop(slice(volume, axis, i), region)});
        }
    }
    return out;
}

std::vector<int> select_training_slices(const Mask3D& mask, Axis axis,
                                        int min_pixels) {
    if (mask.mode() != MaskMode::Binary) {
        throw std::invalid_argument(
            "select_training_slices needs a binary mask");
    }
    std::vector<int> picked;
    for (int i = 0; i < mask.dims().extent(axis); ++i) {
        if (static_cast<int>(slice(mask, axis, i).foreground_count()) >=
            min_pixels) {
            picked.push_back(i);
        }
    }
    return picked;
}

} // namespace c2f
