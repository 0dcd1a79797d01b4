#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "c2f/fixpoint.hpp"
#include "c2f/phantom.hpp"
#include "c2f/volume.hpp"

namespace c2f {

// ---------------------------------------------------------------------------
// Folds

/// Deterministic balanced partition of the case set into k folds.
struct FoldPlan {
    int k = 4;
    std::uint64_t seed = 0;
    std::map<std::string, int> assignment; // case id -> fold

    std::vector<std::vector<std::string>> folds() const;

    nlohmann::json to_json() const;
    static FoldPlan from_json(const nlohmann::json& j);
};

FoldPlan make_folds(std::vector<std::string> case_ids, int k,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// Cases on disk: <dir>/<id>.volume.{json,raw} + <dir>/<id>.truth.{json,raw}

struct EvalCase {
    std::string id;
    Volume3D volume;
    Mask3D truth;
};

void write_case(const Phantom& phantom, const std::string& id,
                const std::filesystem::path& dir);
EvalCase load_case(const std::filesystem::path& dir, const std::string& id);
std::vector<std::string> list_case_ids(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Evaluation rows

/// One report row configuration, mirroring the usual result-table layouts:
/// the coarse starting point, fixed iteration counts, a convergence
/// threshold, the best iteration, or the ground-truth-box diagnostic.
struct RowSpec {
    enum class Kind { Coarse, AfterIterations, Threshold, Best, OracleBox };

    Kind kind = Kind::Coarse;
    int iterations = 0;     // Kind::AfterIterations
    double threshold = 0.0; // Kind::Threshold

    std::string label() const;
    /// Tokens: "coarse", "iter<N>", "thresh<R>", "best", "oracle-box".
    static RowSpec parse(const std::string& token);
};

struct EvalConfig {
    std::vector<RowSpec> rows;
    int max_iterations = 10;
    MarginSpec margins = MarginSpec::fixed(30);
    EmptyMaskPolicy empty_mask_policy = EmptyMaskPolicy::FallbackToFullSlice;

    void validate() const;
};

struct CaseResult {
    std::string case_id;
    double dsc = 0.0;
    std::optional<double> iterations; // absent for coarse / oracle-box rows
    std::string error;                // nonempty when the case failed

    bool ok() const { return error.empty(); }
};

struct Stats {
    double mean = 0.0;
    double stddev = 0.0; // population
    double max = 0.0;
    double min = 0.0;
    std::size_t count = 0;
};

Stats compute_stats(const std::vector<double>& values);

struct ReportRow {
    std::string method;
    std::vector<CaseResult> cases;

    Stats dsc_stats() const;
    std::optional<Stats> iteration_stats() const;
};

struct EvalReport {
    std::vector<ReportRow> rows;
};

/// Supplies the (coarse, fine) model sets for a case; this is where oracle
/// backends get bound to the case's ground truth and cross-validated
/// classifiers get routed to their fold's weights.
using ModelProvider =
    std::function<std::pair<ViewModels, ViewModels>(const EvalCase&)>;

/// Runs the fixed-point loop once per case (threshold disabled, T =
/// max_iterations) and derives every requested row from the recorded
/// trajectory; determinism makes the derived rows identical to dedicated
/// runs. Case failures become errored rows, never silent drops.
EvalReport evaluate(const std::vector<EvalCase>& cases,
                    const ModelProvider& models, const EvalConfig& config);

// ---------------------------------------------------------------------------
// Report emission

/// Long-format CSV: method,case_id,dsc,iterations,status with full-precision
/// values; parse_report_csv is its exact inverse.
std::string report_csv(const EvalReport& report);
EvalReport parse_report_csv(const std::string& text);

/// Aggregate table (Method / Mean DSC / # Iterations / Max DSC / Min DSC),
/// DSC in percent with two decimals.
std::string report_markdown(const EvalReport& report);

} // namespace c2f
