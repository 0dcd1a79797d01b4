#pragma once

#include "c2f/volume.hpp"

namespace c2f {

/// One binary 3D prediction per view, each assembled by stacking that
/// view's thresholded 2D outputs.
struct ViewPredictions {
    Mask3D coronal;
    Mask3D sagittal;
    Mask3D axial;
};

/// Per-voxel 2-of-3 vote. With three binary voters ties cannot happen.
Mask3D majority_vote(const ViewPredictions& views);

} // namespace c2f
