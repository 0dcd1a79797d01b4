#pragma once

#include <filesystem>
#include <stdexcept>

#include "c2f/volume.hpp"

namespace c2f {

/// Malformed header or payload; the message names the offending field.
struct VolumeFormatError : std::runtime_error {
    explicit VolumeFormatError(const std::string& what)
        : std::runtime_error(what) {}
};

// On-disk format: `<name>.json` header with fields `dims` ([W,H,L]), `dtype`
// ("f32"|"u8"), `spacing` ([sx,sy,sz] in mm) and `kind`
// ("intensity"|"mask"), next to a `<name>.raw` little-endian payload in
// canonical (coronal, sagittal, axial-fastest) order. Intensities are f32;
// binary masks are u8 and probability masks f32. Paths may be given as the
// stem or as the .json header path.

void write_volume(const Volume3D& volume, const std::filesystem::path& path);
Volume3D read_volume(const std::filesystem::path& path);

void write_mask(const Mask3D& mask, const std::filesystem::path& path,
                Spacing3 spacing = {});
Mask3D read_mask(const std::filesystem::path& path);

} // namespace c2f
