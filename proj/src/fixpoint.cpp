#include "c2f/fixpoint.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

#include "c2f/fusion.hpp"
#include "c2f/metrics.hpp"

namespace c2f {

const SegModel& ViewModels::view(Axis axis) const {
    switch (axis) {
    case Axis::Coronal: return *coronal;
    case Axis::Sagittal: return *sagittal;
    default: return *axial;
    }
}

void ViewModels::validate() const {
    if (!coronal || !sagittal || !axial) {
        throw std::invalid_argument("a model is missing for one of the views");
    }
}

void FixpointConfig::validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("threshold R must lie in (0, 1]");
    }
    if (max_iterations < 0) {
        throw std::invalid_argument("max iterations T must be >= 0");
    }
}

const char* termination_cause_name(TerminationCause cause) {
    switch (cause) {
    case TerminationCause::ThresholdReached: return "threshold_reached";
    case TerminationCause::MaxIterations: return "max_iterations";
    default: return "empty_mask_terminated";
    }
}

nlohmann::json FixpointTrace::to_json() const {
    nlohmann::json j;
    j["cause"] = termination_cause_name(cause);
    j["coarse_foreground"] = coarse_foreground;
    j["iterations"] = nlohmann::json::array();
    for (const auto& it : iterations) {
        j["iterations"].push_back({{"t", it.t},
                                   {"inter_dsc", it.inter_dsc},
                                   {"foreground", it.foreground},
                                   {"millis", it.millis}});
    }
    return j;
}

namespace {

Slice2D predict_checked(const SegModel& model, const Slice2D& input,
                        Axis axis, int index) {
    Slice2D pred = model.predict(input);
    if (pred.height() != input.height() || pred.width() != input.width()) {
        throw std::runtime_error(
            std::string("model ") + model.descriptor() + " on " +
            axis_name(axis) + " slice " + std::to_string(index) +
            " returned " + std::to_string(pred.height()) + "x" +
            std::to_string(pred.width()) + " for a " +
            std::to_string(input.height()) + "x" +
            std::to_string(input.width()) + " input");
    }
    return pred;
}

// Shared assembly for the coarse and fine passes: one full-size probability
// slice per (view, index), stacked per view, thresholded, then voted.
Mask3D vote_canvases(std::array<std::vector<Slice2D>, 3>&& canvases) {
    auto view_mask = [&](Axis axis) {
        return binarize(stack_mask(canvases[static_cast<int>(axis)], axis,
                                   MaskMode::Probability));
    };
    return majority_vote(ViewPredictions{view_mask(Axis::Coronal),
                                         view_mask(Axis::Sagittal),
                                         view_mask(Axis::Axial)});
}

// Fine-scale pass with regions derived from `region_source`.
Mask3D fine_pass(const Volume3D& volume, const Mask3D& region_source,
                 const ViewModels& models, const MarginSpec& margins) {
    TransformResult tr = transform_r(volume, region_source, margins);

    std::array<std::vector<Slice2D>, 3> canvases;
    for (Axis axis : kAllAxes) {
        auto [rows, cols] = volume.dims().plane_dims(axis);
        auto& v = canvases[static_cast<int>(axis)];
        v.reserve(volume.dims().extent(axis));
        for (int i = 0; i < volume.dims().extent(axis); ++i) {
            v.push_back(Slice2D::zeros(axis, i, rows, cols));
        }
    }
    for (const CropSample& sample : tr.crops) {
        const Region2D& region = sample.region;
        Slice2D pred = predict_checked(models.view(region.axis), sample.patch,
                                       region.axis, region.index);
        auto [rows, cols] = volume.dims().plane_dims(region.axis);
        canvases[static_cast<int>(region.axis)][region.index] =
            paste(region, pred, rows, cols);
    }
    return vote_canvases(std::move(canvases));
}

} // namespace

Mask3D coarse_segment(const Volume3D& volume,
                      const ViewModels& coarse_models) {
    coarse_models.validate();
    std::array<std::vector<Slice2D>, 3> canvases;
    for (Axis axis : kAllAxes) {
        auto& v = canvases[static_cast<int>(axis)];
        v.reserve(volume.dims().extent(axis));
        for (int i = 0; i < volume.dims().extent(axis); ++i) {
            v.push_back(predict_checked(coarse_models.view(axis),
                                        slice(volume, axis, i), axis, i));
        }
    }
    return vote_canvases(std::move(canvases));
}

Mask3D refine_once(const Volume3D& volume, const Mask3D& z_prev,
                   const ViewModels& fine_models, const MarginSpec& margins) {
    fine_models.validate();
    if (z_prev.dims() != volume.dims()) {
        throw std::invalid_argument("refine_once: mask dims " +
                                    z_prev.dims().to_string() +
                                    " vs volume dims " +
                                    volume.dims().to_string());
    }
    return fine_pass(volume, z_prev, fine_models, margins);
}

FixpointResult run_fixpoint(const Volume3D& volume,
                            const ViewModels& coarse_models,
                            const ViewModels& fine_models,
                            const FixpointConfig& config,
                            const IterationHook& on_iteration) {
    config.validate();
    coarse_models.validate();
    fine_models.validate();

    using clock = std::chrono::steady_clock;

    Mask3D current = coarse_segment(volume, coarse_models);
    const Mask3D coarse = current;
    FixpointTrace trace;
    trace.coarse_foreground = current.foreground_count();
    trace.cause = TerminationCause::MaxIterations;
    if (on_iteration) on_iteration(0, current);

    for (int t = 1; t <= config.max_iterations; ++t) {
        const Mask3D* region_source = &current;
        if (current.empty_foreground()) {
            switch (config.empty_mask_policy) {
            case EmptyMaskPolicy::Terminate:
                trace.cause = TerminationCause::EmptyMaskTerminated;
                return {std::move(current), std::move(trace)};
            case EmptyMaskPolicy::FallbackToCoarseBox:
                if (coarse.empty_foreground()) {
                    trace.cause = TerminationCause::EmptyMaskTerminated;
                    return {std::move(current), std::move(trace)};
                }
                region_source = &coarse;
                break;
            case EmptyMaskPolicy::FallbackToFullSlice:
                break; // handled below with a full-coverage source
            }
        }

        auto start = clock::now();
        Mask3D next =
            (region_source->empty_foreground())
                ? fine_pass(volume,
                            Mask3D(volume.dims(), MaskMode::Binary,
                                   std::vector<float>(
                                       volume.dims().voxel_count(), 1.0f)),
                            fine_models, config.margins)
                : fine_pass(volume, *region_source, fine_models,
                            config.margins);
        double millis =
            std::chrono::duration<double, std::milli>(clock::now() - start)
                .count();

        double d = inter_iteration_dsc(current, next);
        current = std::move(next);
        trace.iterations.push_back(
            FixpointTrace::Iteration{t, d, current.foreground_count(), millis});
        if (on_iteration) on_iteration(t, current);
        if (d >= config.threshold) {
            trace.cause = TerminationCause::ThresholdReached;
            break;
        }
    }
    return {std::move(current), std::move(trace)};
}

Mask3D run_with_oracle_box(const Volume3D& volume,
                           const ViewModels& fine_models, const Mask3D& truth,
                           const MarginSpec& margins) {
    return refine_once(volume, truth, fine_models, margins);
}

} // namespace c2f
