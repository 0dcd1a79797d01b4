#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "c2f/model.hpp"
#include "c2f/region.hpp"
#include "c2f/volume.hpp"

namespace c2f {

/// One segmentation model per view.
struct ViewModels {
    std::shared_ptr<const SegModel> coronal;
    std::shared_ptr<const SegModel> sagittal;
    std::shared_ptr<const SegModel> axial;

    const SegModel& view(Axis axis) const;
    void validate() const;
};

/// What to do when the prior mask of a refinement step has no foreground
/// at all. FallbackToFullSlice re-runs the fine models on whole slices,
/// FallbackToCoarseBox reuses regions derived from the coarse mask Z0
/// (terminating if Z0 is also empty), Terminate stops the loop.
enum class EmptyMaskPolicy {
    FallbackToCoarseBox,
    FallbackToFullSlice,
    Terminate,
};

struct FixpointConfig {
    double threshold = 0.95;  ///< R: stop once inter-iteration DSC reaches it
    int max_iterations = 10;  ///< T
    MarginSpec margins = MarginSpec::fixed(30);
    EmptyMaskPolicy empty_mask_policy = EmptyMaskPolicy::FallbackToFullSlice;

    void validate() const;
};

enum class TerminationCause {
    ThresholdReached,
    MaxIterations,
    EmptyMaskTerminated,
};

const char* termination_cause_name(TerminationCause cause);

struct FixpointTrace {
    struct Iteration {
        int t = 0;
        double inter_dsc = 0.0;       ///< d^(t) against the previous mask
        std::uint64_t foreground = 0; ///< |Z^(t)|
        double millis = 0.0;
    };

    std::vector<Iteration> iterations;
    TerminationCause cause = TerminationCause::MaxIterations;
    std::uint64_t coarse_foreground = 0; ///< |Z^(0)|

    nlohmann::json to_json() const;
};

struct FixpointResult {
    Mask3D mask; ///< Z*
    FixpointTrace trace;
};

/// Initialization pass: every view predicted on full slices, thresholded,
/// stacked and majority-voted into Z0.
Mask3D coarse_segment(const Volume3D& volume, const ViewModels& coarse_models);

/// One refinement step: regions from the prior mask via transform_r, fine
/// predictions on the crops, paste-back, per-view stacking, majority vote.
/// Slices where the prior has no foreground stay background. Throws
/// EmptyMaskError when z_prev is entirely empty (the loop applies its
/// empty-mask policy instead).
Mask3D refine_once(const Volume3D& volume, const Mask3D& z_prev,
                   const ViewModels& fine_models, const MarginSpec& margins);

/// Observer invoked with each mask of the run: t = 0 for the coarse mask,
/// then once per refinement.
using IterationHook = std::function<void(int t, const Mask3D& mask)>;

/// The full loop: coarse initialization, then up to T refinements, stopping
/// early once the inter-iteration DSC reaches the threshold R.
FixpointResult run_fixpoint(const Volume3D& volume,
                            const ViewModels& coarse_models,
                            const ViewModels& fine_models,
                            const FixpointConfig& config,
                            const IterationHook& on_iteration = {});

/// Diagnostic upper bound: a single fine pass with regions derived from the
/// ground truth instead of a prediction.
Mask3D run_with_oracle_box(const Volume3D& volume,
                           const ViewModels& fine_models, const Mask3D& truth,
                           const MarginSpec& margins);

} // namespace c2f
