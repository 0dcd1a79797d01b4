// Command-line front end: phantom generation, model training, single-volume
// segmentation, cross-validated evaluation and report formatting.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c2f/eval.hpp"
#include "c2f/fixpoint.hpp"
#include "c2f/metrics.hpp"
#include "c2f/model.hpp"
#include "c2f/phantom.hpp"
#include "c2f/region.hpp"
#include "c2f/rng.hpp"
#include "c2f/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace c2f;

namespace {

// Every subcommand takes `--config file.json`, a flat JSON object of long
// option names. Values given on the command line win; the file only fills
// options that were not set. Required options are checked after the merge.
void add_config(CLI::App* cmd, std::string& path) {
    cmd->add_option("--config", path,
                    "JSON file supplying any flag; flags override it");
}

void merge_json_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path);
    }
    json j;
    in >> j;
    if (!j.is_object()) {
        throw std::runtime_error("config file " + path +
                                 " must hold a JSON object of flags");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "config") continue;
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw std::runtime_error("config file " + path +
                                     ": unknown flag '" + key + "'");
        }
        if (opt->count() > 0) continue; // command line wins
        auto as_text = [](const json& v) {
            return v.is_string() ? v.get<std::string>() : v.dump();
        };
        if (value.is_array()) {
            for (const auto& v : value) opt->add_result(as_text(v));
        } else {
            opt->add_result(as_text(value));
        }
        opt->run_callback();
    }
}

void require_merged(CLI::App* cmd,
                    std::initializer_list<const char*> names) {
    for (const char* name : names) {
        if (cmd->get_option_no_throw(name)->count() == 0) {
            throw std::runtime_error(
                std::string("missing required option ") + name +
                " (give it on the command line or in --config)");
        }
    }
}

constexpr const char* kScaleNames[2] = {"coarse", "fine"};

std::string model_file_name(int scale, Axis axis) {
    return std::string(kScaleNames[scale]) + "_" + axis_name(axis) + ".json";
}

struct ModelDir {
    std::optional<FoldPlan> folds;
    fs::path root;

    // Directory holding the six model files for a case (fold-routed when a
    // fold plan is present).
    fs::path files_for(const std::string& case_id) const {
        if (!folds) return root;
        auto it = folds->assignment.find(case_id);
        if (it == folds->assignment.end()) {
            throw std::runtime_error("case '" + case_id +
                                     "' is not in the fold plan");
        }
        return root / ("fold" + std::to_string(it->second));
    }
};

ModelDir open_model_dir(const fs::path& root) {
    ModelDir dir;
    dir.root = root;
    fs::path plan = root / "folds.json";
    if (fs::exists(plan)) {
        std::ifstream in(plan);
        json j;
        in >> j;
        dir.folds = FoldPlan::from_json(j);
    }
    return dir;
}

std::pair<ViewModels, ViewModels> load_view_models(const fs::path& dir,
                                                   const Mask3D* truth) {
    ViewModels sets[2];
    for (int scale = 0; scale < 2; ++scale) {
        std::shared_ptr<const SegModel> loaded[3];
        for (Axis axis : kAllAxes) {
            fs::path file = dir / model_file_name(scale, axis);
            if (!fs::exists(file)) {
                throw std::runtime_error(
                    "missing model file " + file.string() +
                    " (expected six <scale>_<view>.json files)");
            }
            loaded[static_cast<int>(axis)] =
                instantiate_model(load_model(file), truth);
        }
        sets[scale] = ViewModels{loaded[0], loaded[1], loaded[2]};
    }
    return {sets[0], sets[1]};
}

bool models_need_truth(const fs::path& dir) {
    for (int scale = 0; scale < 2; ++scale) {
        for (Axis axis : kAllAxes) {
            fs::path file = dir / model_file_name(scale, axis);
            if (fs::exists(file) && load_model(file).backend == "oracle") {
                return true;
            }
        }
    }
    return false;
}

PhantomSpec phantom_spec_from_json(const json& j) {
    PhantomSpec spec;
    if (j.contains("dims")) {
        spec.dims = {j["dims"][0].get<int>(), j["dims"][1].get<int>(),
                     j["dims"][2].get<int>()};
    }
    if (j.contains("center")) {
        spec.center = std::array<double, 3>{j["center"][0].get<double>(),
                                            j["center"][1].get<double>(),
                                            j["center"][2].get<double>()};
    }
    if (j.contains("radii")) {
        spec.radii = std::array<double, 3>{j["radii"][0].get<double>(),
                                           j["radii"][1].get<double>(),
                                           j["radii"][2].get<double>()};
    }
    if (j.contains("target_fraction")) {
        spec.target_fraction = j["target_fraction"].get<double>();
    }
    if (j.contains("fg_mean")) spec.fg_mean = j["fg_mean"].get<double>();
    if (j.contains("bg_mean")) spec.bg_mean = j["bg_mean"].get<double>();
    if (j.contains("noise_sigma")) {
        spec.noise_sigma = j["noise_sigma"].get<double>();
    }
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    return spec;
}

std::string case_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "case_%03d", i);
    return buf;
}

EmptyMaskPolicy parse_policy(const std::string& name) {
    if (name == "full-slice") return EmptyMaskPolicy::FallbackToFullSlice;
    if (name == "coarse-box") return EmptyMaskPolicy::FallbackToCoarseBox;
    if (name == "terminate") return EmptyMaskPolicy::Terminate;
    throw std::runtime_error("unknown empty-mask policy '" + name + "'");
}

// ---------------------------------------------------------------------------
// gen-phantom

int run_gen_phantom(const std::string& spec_path, const std::string& out) {
    std::ifstream in(spec_path);
    if (!in) {
        throw std::runtime_error("cannot open phantom spec " + spec_path);
    }
    json j;
    in >> j;
    PhantomSpec base = phantom_spec_from_json(j);
    int count = j.value("count", 1);

    fs::create_directories(out);
    std::vector<PhantomSpec> specs =
        count == 1 ? std::vector<PhantomSpec>{base}
                   : phantom_family(base, count);
    for (int i = 0; i < count; ++i) {
        Phantom ph = gen_phantom(specs[i]);
        write_case(ph, case_name(i), out);
    }
    std::cout << "wrote " << count << " case(s) to " << out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string backend = "oracle";
    std::string cases;
    std::string out;
    int folds = 4;
    std::uint64_t seed = 1;
    double noise = 0.05;
    int jitter = 1;
    double learning_rate = 0.5;
    int epochs = 50;
    int min_pixels = 100;
    int margin_lo = 0;
    int margin_hi = 60;
};

ClassifierParams train_one_classifier(
    const std::vector<std::string>& training_ids, const fs::path& cases_dir,
    Axis axis, bool fine, const TrainOptions& opt) {
    std::vector<TrainSample> samples;
    for (const std::string& id : training_ids) {
        EvalCase c = load_case(cases_dir, id);
        if (fine) {
            MarginSpec margins = MarginSpec::random_uniform(
                opt.margin_lo, opt.margin_hi,
                rng::mix(opt.seed, rng::hash_string(id)));
            TransformResult tr = transform_r(c.volume, c.truth, margins);
            for (const CropSample& sample : tr.crops) {
                if (sample.region.axis != axis) continue;
                Slice2D truth_crop =
                    crop(slice(c.truth, axis, sample.region.index),
                         sample.region);
                samples.push_back(TrainSample{sample.patch, truth_crop});
            }
        } else {
            for (int i : select_training_slices(c.truth, axis,
                                                opt.min_pixels)) {
                samples.push_back(TrainSample{slice(c.volume, axis, i),
                                              slice(c.truth, axis, i)});
            }
        }
    }
    if (samples.empty()) {
        throw std::runtime_error(
            std::string("no training slices for the ") + axis_name(axis) +
            (fine ? " fine" : " coarse") +
            " model; lower --min-pixels or enlarge the phantoms");
    }
    ClassifierParams params;
    params.learning_rate = opt.learning_rate;
    params.epochs = opt.epochs;
    return classifier_train(samples, params).params;
}

int run_train(const TrainOptions& opt) {
    auto ids = list_case_ids(opt.cases);
    if (ids.empty()) {
        throw std::runtime_error("no cases found in " + opt.cases);
    }
    FoldPlan plan = make_folds(ids, opt.folds, opt.seed);
    fs::create_directories(opt.out);
    {
        std::ofstream out(fs::path(opt.out) / "folds.json");
        out << plan.to_json().dump(2) << "\n";
    }

    for (int fold = 0; fold < plan.k; ++fold) {
        fs::path fold_dir = fs::path(opt.out) / ("fold" + std::to_string(fold));
        fs::create_directories(fold_dir);
        std::vector<std::string> training_ids;
        for (const auto& [id, f] : plan.assignment) {
            if (f != fold) training_ids.push_back(id);
        }

        for (int scale = 0; scale < 2; ++scale) {
            for (Axis axis : kAllAxes) {
                ModelFile model;
                if (opt.backend == "oracle") {
                    model.backend = "oracle";
                    // one seed per scale: the three views of a set share
                    // their noise basis, the coarse and fine sets do not
                    model.oracle = OracleParams{
                        opt.noise, opt.jitter,
                        rng::mix(opt.seed, static_cast<std::uint64_t>(scale))};
                } else if (opt.backend == "classifier") {
                    model.backend = "classifier";
                    model.classifier = train_one_classifier(
                        training_ids, opt.cases, axis, scale == 1, opt);
                } else {
                    throw std::runtime_error("unknown backend '" +
                                             opt.backend + "'");
                }
                save_model(model, fold_dir / model_file_name(scale, axis));
            }
        }
        std::cout << "fold " << fold << ": wrote 6 " << opt.backend
                  << " models (" << training_ids.size()
                  << " training cases)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOptions {
    std::string volume;
    std::string models;
    std::string truth;
    std::string out;
    double threshold = 0.95;
    int max_iters = 10;
    int margins = 30;
    std::string policy = "full-slice";
};

int run_segment(const SegmentOptions& opt) {
    Volume3D volume = read_volume(opt.volume);

    std::optional<Mask3D> truth;
    if (!opt.truth.empty()) {
        truth = read_mask(opt.truth);
    }
    if (models_need_truth(opt.models) && !truth) {
        throw std::runtime_error(
            "oracle models need --truth <mask> (they corrupt the reference "
            "segmentation instead of predicting from intensities)");
    }
    auto [coarse_models, fine_models] =
        load_view_models(opt.models, truth ? &*truth : nullptr);

    FixpointConfig config;
    config.threshold = opt.threshold;
    config.max_iterations = opt.max_iters;
    config.margins = MarginSpec::fixed(opt.margins);
    config.empty_mask_policy = parse_policy(opt.policy);

    auto result = run_fixpoint(volume, coarse_models, fine_models, config);

    fs::create_directories(opt.out);
    write_mask(result.mask, fs::path(opt.out) / "final", volume.spacing());
    {
        std::ofstream trace(fs::path(opt.out) / "trace.json");
        trace << result.trace.to_json().dump(2) << "\n";
    }
    std::cout << "final mask: " << result.mask.foreground_count()
              << " foreground voxels after " << result.trace.iterations.size()
              << " iteration(s), "
              << termination_cause_name(result.trace.cause) << "\n";
    if (truth) {
        std::cout << "DSC vs truth: " << dsc(result.mask, *truth) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
    std::string cases;
    std::string models;
    std::string rows = "coarse,iter1,iter10,thresh0.95,oracle-box";
    std::string out;
    int max_iters = 10;
    int margins = 30;
    std::string policy = "full-slice";
};

int run_evaluate(const EvaluateOptions& opt) {
    auto ids = list_case_ids(opt.cases);
    if (ids.empty()) {
        throw std::runtime_error("no cases found in " + opt.cases);
    }
    std::vector<EvalCase> cases;
    cases.reserve(ids.size());
    for (const std::string& id : ids) {
        cases.push_back(load_case(opt.cases, id));
    }

    ModelDir models = open_model_dir(opt.models);
    ModelProvider provider = [&](const EvalCase& c) {
        return load_view_models(models.files_for(c.id), &c.truth);
    };

    EvalConfig config;
    std::stringstream tokens(opt.rows);
    std::string token;
    while (std::getline(tokens, token, ',')) {
        if (!token.empty()) config.rows.push_back(RowSpec::parse(token));
    }
    config.max_iterations = opt.max_iters;
    config.margins = MarginSpec::fixed(opt.margins);
    config.empty_mask_policy = parse_policy(opt.policy);

    EvalReport report = evaluate(cases, provider, config);
    std::ofstream out(opt.out);
    if (!out) {
        throw std::runtime_error("cannot write report " + opt.out);
    }
    out << report_csv(report);
    std::cout << report_markdown(report);
    std::cout << "per-case report written to " << opt.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// report

int run_report(const std::string& in_path, const std::string& fmt) {
    std::ifstream in(in_path);
    if (!in) {
        throw std::runtime_error("cannot open report " + in_path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    EvalReport report = parse_report_csv(buffer.str());
    if (fmt == "md") {
        std::cout << report_markdown(report);
    } else if (fmt == "csv") {
        std::cout << report_csv(report);
    } else {
        throw std::runtime_error("unknown report format '" + fmt +
                                 "' (expected md or csv)");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coarse-to-fine 3D segmentation: tri-axial slicing, "
                 "region shrinking and fixed-point refinement"};
    app.require_subcommand(1);

    // gen-phantom
    auto* gen = app.add_subcommand("gen-phantom",
                                   "Generate synthetic test volumes");
    std::string spec_path, gen_out, gen_cfg;
    gen->add_option("--spec", spec_path, "phantom spec JSON");
    gen->add_option("--out", gen_out, "output case directory");
    add_config(gen, gen_cfg);

    // train
    auto* train = app.add_subcommand("train", "Write per-view model files");
    TrainOptions topt;
    std::string train_cfg;
    train->add_option("--backend", topt.backend, "oracle or classifier");
    train->add_option("--cases", topt.cases, "case directory");
    train->add_option("--folds", topt.folds, "fold count (default 4)");
    train->add_option("--seed", topt.seed, "fold/model seed");
    train->add_option("--out", topt.out, "model directory");
    train->add_option("--noise", topt.noise,
                      "oracle noise coefficient (default 0.05)");
    train->add_option("--jitter", topt.jitter,
                      "oracle boundary jitter in pixels (default 1)");
    train->add_option("--lr", topt.learning_rate,
                      "classifier learning rate (default 0.5)");
    train->add_option("--epochs", topt.epochs,
                      "classifier epochs (default 50)");
    train->add_option("--min-pixels", topt.min_pixels,
                      "coarse-slice foreground threshold (default 100)");
    train->add_option("--margin-lo", topt.margin_lo,
                      "fine-crop margin lower bound (default 0)");
    train->add_option("--margin-hi", topt.margin_hi,
                      "fine-crop margin upper bound (default 60)");
    add_config(train, train_cfg);

    // segment
    auto* seg = app.add_subcommand("segment",
                                   "Segment one volume with the fixed-point "
                                   "loop");
    SegmentOptions sopt;
    std::string seg_cfg;
    seg->add_option("--volume", sopt.volume, "intensity volume");
    seg->add_option("--models", sopt.models,
                    "directory with the six model files");
    seg->add_option("--truth", sopt.truth,
                    "ground-truth mask (required by oracle models)");
    seg->add_option("--threshold", sopt.threshold,
                    "inter-iteration DSC threshold R (default 0.95)");
    seg->add_option("--max-iters", sopt.max_iters,
                    "iteration cap T (default 10)");
    seg->add_option("--margins", sopt.margins,
                    "testing frame width in pixels (default 30)");
    seg->add_option("--policy", sopt.policy,
                    "empty-mask policy: full-slice|coarse-box|terminate");
    seg->add_option("--out", sopt.out, "output directory");
    add_config(seg, seg_cfg);

    // evaluate
    auto* eval = app.add_subcommand("evaluate",
                                    "Cross-validated evaluation over a case "
                                    "directory");
    EvaluateOptions eopt;
    std::string eval_cfg;
    eval->add_option("--cases", eopt.cases, "case directory");
    eval->add_option("--models", eopt.models,
                     "model directory (flat or with folds.json)");
    eval->add_option("--rows", eopt.rows,
                     "comma list: coarse,iterN,threshR,best,oracle-box");
    eval->add_option("--max-iters", eopt.max_iters,
                     "iteration cap T (default 10)");
    eval->add_option("--margins", eopt.margins,
                     "testing frame width in pixels (default 30)");
    eval->add_option("--policy", eopt.policy,
                     "empty-mask policy: full-slice|coarse-box|terminate");
    eval->add_option("--out", eopt.out, "per-case CSV path");
    add_config(eval, eval_cfg);

    // report
    auto* rep = app.add_subcommand("report", "Format a per-case CSV report");
    std::string rep_in, rep_fmt = "md", rep_cfg;
    rep->add_option("--in", rep_in, "per-case CSV");
    rep->add_option("--format", rep_fmt, "md or csv (default md)");
    add_config(rep, rep_cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            merge_json_config(gen, gen_cfg);
            require_merged(gen, {"--spec", "--out"});
            return run_gen_phantom(spec_path, gen_out);
        }
        if (train->parsed()) {
            merge_json_config(train, train_cfg);
            require_merged(train, {"--cases", "--out"});
            return run_train(topt);
        }
        if (seg->parsed()) {
            merge_json_config(seg, seg_cfg);
            require_merged(seg, {"--volume", "--models", "--out"});
            return run_segment(sopt);
        }
        if (eval->parsed()) {
            merge_json_config(eval, eval_cfg);
            require_merged(eval, {"--cases", "--models", "--out"});
            return run_evaluate(eopt);
        }
        if (rep->parsed()) {
            merge_json_config(rep, rep_cfg);
            require_merged(rep, {"--in"});
            return run_report(rep_in, rep_fmt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
