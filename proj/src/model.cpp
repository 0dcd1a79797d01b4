#include "c2f/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "c2f/metrics.hpp"
#include "c2f/rng.hpp"

namespace c2f {

namespace {

constexpr std::uint64_t kFlipTag = 0x666c6970ULL;
constexpr std::uint64_t kJitterRowTag = 0x6a726f77ULL;
constexpr std::uint64_t kJitterColTag = 0x6a636f6cULL;

// In-plane distance (in pixels) at which a view's flip window is fully
// offset from the other views'. Within this band of the truth the windows
// overlap, so the same voxel tends to flip in several views at once and the
// errors survive majority voting; beyond it each flip is private to one
// view and voting removes it. This concentrates the fused corruption around
// the target, the way segmentation networks degrade near object boundaries
// rather than uniformly.
constexpr int kCorrelationBand = 24;

std::uint64_t pixel_key(std::uint64_t seed, std::uint64_t tag, Axis axis,
                        int index, int global_row, int global_col) {
    std::uint64_t h = rng::mix(seed, tag);
    h = rng::mix(h, static_cast<std::uint64_t>(axis));
    h = rng::mix(h, static_cast<std::uint64_t>(index));
    h = rng::mix(h, static_cast<std::uint64_t>(global_row));
    h = rng::mix(h, static_cast<std::uint64_t>(global_col));
    return h;
}

// Key shared by the three views: the global 3D voxel the pixel addresses.
std::uint64_t voxel_key(std::uint64_t seed, Axis axis, int index,
                        int global_row, int global_col) {
    int w, h, l;
    switch (axis) {
    case Axis::Coronal: w = index; h = global_row; l = global_col; break;
    case Axis::Sagittal: w = global_row; h = index; l = global_col; break;
    default: w = global_row; h = global_col; l = index; break;
    }
    std::uint64_t key = rng::mix(seed, kFlipTag);
    key = rng::mix(key, static_cast<std::uint64_t>(w));
    key = rng::mix(key, static_cast<std::uint64_t>(h));
    return rng::mix(key, static_cast<std::uint64_t>(l));
}

// Two-pass Manhattan distance to the nearest foreground pixel of the crop;
// "far" (>= kCorrelationBand) everywhere when the crop has no foreground.
std::vector<int> distance_to_foreground(const Slice2D& truth) {
    const int h = truth.height(), w = truth.width();
    const int inf = kCorrelationBand + 1;
    std::vector<int> d(static_cast<std::size_t>(h) * w, inf);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (truth.at(r, c) != 0.0f) {
                d[i] = 0;
                continue;
            }
            if (r > 0) d[i] = std::min(d[i], d[i - w] + 1);
            if (c > 0) d[i] = std::min(d[i], d[i - 1] + 1);
        }
    }
    for (int r = h - 1; r >= 0; --r) {
        for (int c = w - 1; c >= 0; --c) {
            std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (r + 1 < h) d[i] = std::min(d[i], d[i + w] + 1);
            if (c + 1 < w) d[i] = std::min(d[i], d[i + 1] + 1);
        }
    }
    return d;
}

double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

void OracleParams::validate() const {
    if (!(noise_coefficient >= 0.0)) {
        throw std::invalid_argument("oracle noise coefficient must be >= 0");
    }
    if (boundary_jitter < 0) {
        throw std::invalid_argument("oracle boundary jitter must be >= 0");
    }
}

Slice2D oracle_predict(const Slice2D& intensity, const Slice2D& truth,
                       const OracleParams& params) {
    params.validate();
    if (intensity.height() != truth.height() ||
        intensity.width() != truth.width()) {
        throw std::invalid_argument(
            "oracle_predict: intensity " + std::to_string(intensity.height()) +
            "x" + std::to_string(intensity.width()) + " vs truth " +
            std::to_string(truth.height()) + "x" +
            std::to_string(truth.width()));
    }
    if (!truth.is_binary()) {
        throw std::invalid_argument("oracle_predict: truth must be binary");
    }

    const int h = truth.height(), w = truth.width();
    const auto area = static_cast<double>(h) * w;
    double background_fraction =
        1.0 - static_cast<double>(truth.foreground_count()) / area;
    double flip_p =
        std::min(0.5, params.noise_coefficient * background_fraction);

    const Axis axis = intensity.axis();
    const int index = intensity.index();
    const int r0 = intensity.row_origin(), c0 = intensity.col_origin();
    const int jr = params.boundary_jitter;
    const auto jspan = static_cast<std::uint32_t>(2 * jr + 1);

    // Flip rule: the views share one uniform field over global voxel
    // coordinates, and each view reads a window of length flip_p whose
    // offset grows with the pixel's distance to the crop's foreground. The
    // marginal flip probability is exactly flip_p for every pixel; the
    // cross-view coincidence (what survives 2-of-3 voting) fades to zero
    // beyond kCorrelationBand.
    std::vector<int> dist = distance_to_foreground(truth);
    const double rank = static_cast<double>(axis);
    const double k_noise = params.noise_coefficient;

    std::vector<float> out(static_cast<std::size_t>(h) * w);
    std::size_t k = 0;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c, ++k) {
            int gr = r0 + r, gc = c0 + c;
            float label;
            if (jr == 0) {
                label = truth.at(r, c);
            } else {
                int dr = static_cast<int>(rng::bounded(
                             pixel_key(params.seed, kJitterRowTag, axis,
                                       index, gr, gc),
                             jspan)) -
                         jr;
                int dc = static_cast<int>(rng::bounded(
                             pixel_key(params.seed, kJitterColTag, axis,
                                       index, gr, gc),
                             jspan)) -
                         jr;
                label = truth.at(std::clamp(r + dr, 0, h - 1),
                                 std::clamp(c + dc, 0, w - 1));
            }
            double u = rng::to_unit(
                voxel_key(params.seed, axis, index, gr, gc));
            double proximity = std::sqrt(
                std::sqrt(std::min(dist[k], kCorrelationBand) /
                          static_cast<double>(kCorrelationBand)));
            double window = u - rank * k_noise * proximity;
            window -= std::floor(window);
            if (window < flip_p) label = 1.0f - label;
            out[k] = label;
        }
    }
    return Slice2D(axis, index, h, w, std::move(out), r0, c0);
}

OracleModel::OracleModel(const Mask3D& truth, OracleParams params)
    : truth_(&truth), params_(params) {
    params_.validate();
    if (truth.mode() != MaskMode::Binary) {
        throw std::invalid_argument("oracle truth mask must be binary");
    }
}

Slice2D OracleModel::predict(const Slice2D& intensity) const {
    // Rebuild the matching truth crop from the slice's address metadata.
    Slice2D full_truth = slice(*truth_, intensity.axis(), intensity.index());
    if (intensity.row_origin() + intensity.height() > full_truth.height() ||
        intensity.col_origin() + intensity.width() > full_truth.width()) {
        throw std::invalid_argument(
            "oracle: slice crop exceeds the bound truth volume");
    }
    std::vector<float> data(static_cast<std::size_t>(intensity.height()) *
                            intensity.width());
    std::size_t k = 0;
    for (int r = 0; r < intensity.height(); ++r) {
        for (int c = 0; c < intensity.width(); ++c, ++k) {
            data[k] = full_truth.at(intensity.row_origin() + r,
                                    intensity.col_origin() + c);
        }
    }
    Slice2D truth_crop(intensity.axis(), intensity.index(),
                       intensity.height(), intensity.width(), std::move(data),
                       intensity.row_origin(), intensity.col_origin());
    return oracle_predict(intensity, truth_crop, params_);
}

std::string OracleModel::descriptor() const {
    std::ostringstream os;
    os << "oracle(k=" << params_.noise_coefficient
       << ",jitter=" << params_.boundary_jitter << ",seed=" << params_.seed
       << ")";
    return os.str();
}

void ClassifierParams::validate() const {
    for (double w : weights) {
        if (!std::isfinite(w)) {
            throw std::invalid_argument("classifier weights must be finite");
        }
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("classifier learning rate must be > 0");
    }
    if (epochs < 0) {
        throw std::invalid_argument("classifier epoch count must be >= 0");
    }
}

namespace {

// Per-pixel features: intensity, 5x5 local mean, 5x5 local variance, bias.
// Edges use replicate padding, which also covers slices smaller than the
// window.
void pixel_features(const Slice2D& s, int r, int c, double out[4]) {
    const int h = s.height(), w = s.width();
    double sum = 0.0, sum2 = 0.0;
    for (int dr = -2; dr <= 2; ++dr) {
        int rr = std::clamp(r + dr, 0, h - 1);
        for (int dc = -2; dc <= 2; ++dc) {
            int cc = std::clamp(c + dc, 0, w - 1);
            double v = s.at(rr, cc);
            sum += v;
            sum2 += v * v;
        }
    }
    double mean = sum / 25.0;
    double var = std::max(0.0, sum2 / 25.0 - mean * mean);
    out[0] = s.at(r, c);
    out[1] = mean;
    out[2] = var;
    out[3] = 1.0;
}

} // namespace

Slice2D classifier_predict(const Slice2D& intensity,
                           const ClassifierParams& params) {
    params.validate();
    std::vector<float> out(static_cast<std::size_t>(intensity.height()) *
                           intensity.width());
    std::size_t k = 0;
    double f[4];
    for (int r = 0; r < intensity.height(); ++r) {
        for (int c = 0; c < intensity.width(); ++c, ++k) {
            pixel_features(intensity, r, c, f);
            double z = 0.0;
            for (int i = 0; i < 4; ++i) z += params.weights[i] * f[i];
            out[k] = static_cast<float>(sigmoid(z));
        }
    }
    return Slice2D(intensity.axis(), intensity.index(), intensity.height(),
                   intensity.width(), std::move(out), intensity.row_origin(),
                   intensity.col_origin());
}

std::array<double, 4> classifier_loss_gradient(const Slice2D& image,
                                               const Slice2D& truth,
                                               const ClassifierParams& params) {
    Slice2D z = classifier_predict(image, params);
    GradientField dz = soft_dsc_gradient(z.data(), truth.data());
    std::array<double, 4> grad{0.0, 0.0, 0.0, 0.0};
    std::size_t k = 0;
    double f[4];
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c, ++k) {
            pixel_features(image, r, c, f);
            double zv = z.data()[k];
            double chain = dz[k] * zv * (1.0 - zv); // sigmoid derivative
            for (int i = 0; i < 4; ++i) grad[i] += chain * f[i];
        }
    }
    return grad;
}

TrainResult classifier_train(const std::vector<TrainSample>& samples,
                             ClassifierParams params) {
    params.validate();
    if (samples.empty()) {
        throw std::invalid_argument("classifier_train: no samples");
    }
    for (const auto& s : samples) {
        if (s.image.height() != s.truth.height() ||
            s.image.width() != s.truth.width()) {
            throw std::invalid_argument(
                "classifier_train: sample image/truth dims differ");
        }
        if (!s.truth.is_binary()) {
            throw std::invalid_argument(
                "classifier_train: sample truth must be binary");
        }
    }

    TrainResult result{params, {}};
    result.epoch_loss.reserve(params.epochs);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        double loss_sum = 0.0;
        int counted = 0;
        for (const auto& s : samples) {
            Slice2D z = classifier_predict(s.image, result.params);
            double loss;
            try {
                loss = soft_dsc_loss(z.data(), s.truth.data());
            } catch (const DegenerateInputError&) {
                std::cerr << "classifier_train: skipping degenerate sample ("
                          << axis_name(s.image.axis()) << " slice "
                          << s.image.index() << ")\n";
                continue;
            }
            loss_sum += loss;
            ++counted;
            auto grad =
                classifier_loss_gradient(s.image, s.truth, result.params);
            for (int i = 0; i < 4; ++i) {
                result.params.weights[i] -=
                    result.params.learning_rate * grad[i];
            }
        }
        result.epoch_loss.push_back(counted > 0 ? loss_sum / counted : 0.0);
    }
    return result;
}

ClassifierModel::ClassifierModel(ClassifierParams params) : params_(params) {
    params_.validate();
}

Slice2D ClassifierModel::predict(const Slice2D& intensity) const {
    return classifier_predict(intensity, params_);
}

std::string ClassifierModel::descriptor() const {
    std::ostringstream os;
    os << "classifier(w=[";
    for (int i = 0; i < 4; ++i) {
        os << (i ? "," : "") << params_.weights[i];
    }
    os << "])";
    return os.str();
}

nlohmann::json ModelFile::to_json() const {
    nlohmann::json j;
    j["backend"] = backend;
    if (backend == "oracle") {
        j["seed"] = oracle.seed;
        j["params"] = {{"noise_coefficient", oracle.noise_coefficient},
                       {"boundary_jitter", oracle.boundary_jitter}};
    } else if (backend == "classifier") {
        j["seed"] = 0;
        j["params"] = {{"weights", classifier.weights},
                       {"learning_rate", classifier.learning_rate},
                       {"epochs", classifier.epochs}};
    } else {
        throw std::invalid_argument("unknown model backend '" + backend + "'");
    }
    return j;
}

ModelFile ModelFile::from_json(const nlohmann::json& j) {
    ModelFile m;
    m.backend = j.at("backend").get<std::string>();
    const auto& p = j.at("params");
    if (m.backend == "oracle") {
        m.oracle.noise_coefficient = p.at("noise_coefficient").get<double>();
        m.oracle.boundary_jitter = p.at("boundary_jitter").get<int>();
        m.oracle.seed = j.at("seed").get<std::uint64_t>();
        m.oracle.validate();
    } else if (m.backend == "classifier") {
        auto w = p.at("weights").get<std::vector<double>>();
        if (w.size() != m.classifier.weights.size()) {
            throw std::invalid_argument("classifier weight count must be 4");
        }
        std::copy(w.begin(), w.end(), m.classifier.weights.begin());
        m.classifier.learning_rate = p.at("learning_rate").get<double>();
        m.classifier.epochs = p.at("epochs").get<int>();
        m.classifier.validate();
    } else {
        throw std::invalid_argument("unknown model backend '" + m.backend +
                                    "'");
    }
    return m;
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write model file " + path.string());
    }
    out << model.to_json().dump(2) << "\n";
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file " + path.string());
    }
    nlohmann::json j;
    in >> j;
    return ModelFile::from_json(j);
}

std::shared_ptr<const SegModel> instantiate_model(const ModelFile& model,
                                                  const Mask3D* truth) {
    if (model.backend == "oracle") {
        if (truth == nullptr) {
            throw std::invalid_argument(
                "oracle backend requires a ground-truth mask");
        }
        return std::make_shared<OracleModel>(*truth, model.oracle);
    }
    if (model.backend == "classifier") {
        return std::make_shared<ClassifierModel>(model.classifier);
    }
    throw std::invalid_argument("unknown model backend '" + model.backend +
                                "'");
}

} // namespace c2f
