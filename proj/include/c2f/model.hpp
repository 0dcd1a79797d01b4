#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "c2f/volume.hpp"

namespace c2f {

/// Pluggable per-view 2D segmentation function: probability slice out,
/// identical dims in and out.
class SegModel {
  public:
    virtual ~SegModel() = default;
    virtual Slice2D predict(const Slice2D& intensity) const = 0;
    /// Backend name plus a short parameter digest, for logs and traces.
    virtual std::string descriptor() const = 0;
};

/// Synthetic stand-in for a trained network. It corrupts the ground truth
/// with (a) per-pixel label flips of probability min(0.5, k * background
/// fraction of the crop) and (b) boundary jitter within a pixel radius.
/// Both noise fields are pure functions of (seed, view, slice index, global
/// pixel position), so a pixel's corruption does not depend on which crop it
/// was predicted through; shrinking the crop can only remove flips, never
/// add them. That gives the backend the property the pipeline banks on:
/// smaller input regions yield strictly less corrupted output.
struct OracleParams {
    double noise_coefficient = 0.0; ///< k, false-label rate per unit background fraction
    int boundary_jitter = 0;        ///< max displacement of the truth lookup, pixels
    std::uint64_t seed = 0;

    void validate() const;
};

/// Core entry point: corrupt `truth` (the ground truth restricted to the
/// same crop as `intensity`) according to `params`. With k = 0 and jitter 0,
/// returns the truth exactly.
Slice2D oracle_predict(const Slice2D& intensity, const Slice2D& truth,
                       const OracleParams& params);

/// SegModel wrapper binding the full-volume ground truth as the oracle's
/// hidden side channel. Slices are matched to the truth volume through
/// their axis/index/origin metadata.
class OracleModel final : public SegModel {
  public:
    OracleModel(const Mask3D& truth, OracleParams params);

    Slice2D predict(const Slice2D& intensity) const override;
    std::string descriptor() const override;
    const OracleParams& params() const { return params_; }

  private:
    const Mask3D* truth_;
    OracleParams params_;
};

/// Logistic per-pixel classifier over a fixed feature set: intensity, local
/// mean and local variance over a 5x5 window (replicate padding), and a
/// bias. Weights live in the same order.
struct ClassifierParams {
    std::array<double, 4> weights{0.0, 0.0, 0.0, 0.0};
    double learning_rate = 0.1;
    int epochs = 50;

    void validate() const;
};

inline constexpr std::array<const char*, 4> kClassifierFeatureNames{
    "intensity", "local_mean", "local_variance", "bias"};

Slice2D classifier_predict(const Slice2D& intensity,
                           const ClassifierParams& params);

struct TrainSample {
    Slice2D image;
    Slice2D truth; // binary
};

struct TrainResult {
    ClassifierParams params;
    std::vector<double> epoch_loss; // mean soft-DSC loss per epoch
};

/// Gradient descent on the soft DSC loss, one sample per step. The loss
/// gradient is chained through the sigmoid into the feature weights.
/// Degenerate samples (both sums zero) are skipped with a warning.
TrainResult classifier_train(const std::vector<TrainSample>& samples,
                             ClassifierParams params);

/// Analytic d loss / d weights for one sample; used by the trainer and by
/// the finite-difference checks.
std::array<double, 4> classifier_loss_gradient(const Slice2D& image,
                                               const Slice2D& truth,
                                               const ClassifierParams& params);

class ClassifierModel final : public SegModel {
  public:
    explicit ClassifierModel(ClassifierParams params);
    Slice2D predict(const Slice2D& intensity) const override;
    std::string descriptor() const override;
    const ClassifierParams& params() const { return params_; }

  private:
    ClassifierParams params_;
};

// Model files: {"backend": "oracle"|"classifier", "seed": N, "params": {...}}
struct ModelFile {
    std::string backend;
    OracleParams oracle;         // valid when backend == "oracle"
    ClassifierParams classifier; // valid when backend == "classifier"

    nlohmann::json to_json() const;
    static ModelFile from_json(const nlohmann::json& j);
};

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// Instantiate a loaded model. Oracle backends need the case's ground truth
/// (the caller keeps it alive); classifiers ignore it.
std::shared_ptr<const SegModel> instantiate_model(const ModelFile& model,
                                                  const Mask3D* truth);

} // namespace c2f
