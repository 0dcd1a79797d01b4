#include "c2f/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "c2f/metrics.hpp"
#include "c2f/rng.hpp"
#include "c2f/volume_io.hpp"

namespace c2f {

// ---------------------------------------------------------------------------
// Folds

std::vector<std::vector<std::string>> FoldPlan::folds() const {
    std::vector<std::vector<std::string>> out(k);
    for (const auto& [id, fold] : assignment) {
        out[fold].push_back(id);
    }
    return out;
}

nlohmann::json FoldPlan::to_json() const {
    nlohmann::json j;
    j["k"] = k;
    j["seed"] = seed;
    j["assignment"] = assignment;
    return j;
}

FoldPlan FoldPlan::from_json(const nlohmann::json& j) {
    FoldPlan plan;
    plan.k = j.at("k").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.assignment =
        j.at("assignment").get<std::map<std::string, int>>();
    return plan;
}

FoldPlan make_folds(std::vector<std::string> case_ids, int k,
                    std::uint64_t seed) {
    if (k < 1) {
        throw std::invalid_argument("fold count must be >= 1");
    }
    if (static_cast<int>(case_ids.size()) < k) {
        throw std::invalid_argument(
            "cannot split " + std::to_string(case_ids.size()) +
            " cases into " + std::to_string(k) + " folds");
    }
    std::sort(case_ids.begin(), case_ids.end());
    if (std::adjacent_find(case_ids.begin(), case_ids.end()) !=
        case_ids.end()) {
        throw std::invalid_argument("case ids must be unique");
    }
    // Fisher-Yates with our own stream, then round-robin: sizes differ by
    // at most one and the plan depends only on (ids, k, seed).
    rng::Stream stream(rng::mix(seed, 0x666f6c6473ULL));
    for (std::size_t i = case_ids.size() - 1; i > 0; --i) {
        std::size_t j = stream.below(static_cast<std::uint32_t>(i + 1));
        std::swap(case_ids[i], case_ids[j]);
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    for (std::size_t i = 0; i < case_ids.size(); ++i) {
        plan.assignment[case_ids[i]] = static_cast<int>(i % k);
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Cases on disk

void write_case(const Phantom& phantom, const std::string& id,
                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_volume(phantom.volume, dir / (id + ".volume"));
    write_mask(phantom.truth, dir / (id + ".truth"),
               phantom.volume.spacing());
}

EvalCase load_case(const std::filesystem::path& dir, const std::string& id) {
    return EvalCase{id, read_volume(dir / (id + ".volume")),
                    read_mask(dir / (id + ".truth"))};
}

std::vector<std::string> list_case_ids(const std::filesystem::path& dir) {
    std::vector<std::string> ids;
    const std::string suffix = ".volume.json";
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(),
                         suffix) == 0) {
            ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// ---------------------------------------------------------------------------
// Rows

std::string RowSpec::label() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::Coarse:
        return "Coarse Segmentation";
    case Kind::AfterIterations:
        os << "After " << iterations
           << (iterations == 1 ? " Iteration" : " Iterations");
        return os.str();
    case Kind::Threshold:
        os << "After d_t > " << threshold;
        return os.str();
    case Kind::Best:
        return "Best among All Iterations";
    default:
        return "Oracle Bounding Box";
    }
}

RowSpec RowSpec::parse(const std::string& token) {
    RowSpec spec;
    if (token == "coarse") {
        spec.kind = Kind::Coarse;
    } else if (token == "best") {
        spec.kind = Kind::Best;
    } else if (token == "oracle-box") {
        spec.kind = Kind::OracleBox;
    } else if (token.rfind("iter", 0) == 0) {
        spec.kind = Kind::AfterIterations;
        spec.iterations = std::stoi(token.substr(4));
        if (spec.iterations < 1) {
            throw std::invalid_argument("row '" + token +
                                        "': iteration count must be >= 1");
        }
    } else if (token.rfind("thresh", 0) == 0) {
        spec.kind = Kind::Threshold;
        spec.threshold = std::stod(token.substr(6));
        if (!(spec.threshold > 0.0 && spec.threshold <= 1.0)) {
            throw std::invalid_argument("row '" + token +
                                        "': threshold must lie in (0, 1]");
        }
    } else {
        throw std::invalid_argument("unknown report row '" + token + "'");
    }
    return spec;
}

void EvalConfig::validate() const {
    if (rows.empty()) {
        throw std::invalid_argument("no report rows requested");
    }
    if (max_iterations < 0) {
        throw std::invalid_argument("max iterations must be >= 0");
    }
    for (const RowSpec& row : rows) {
        if (row.kind == RowSpec::Kind::AfterIterations &&
            row.iterations > max_iterations) {
            throw std::invalid_argument(
                "row '" + row.label() + "' needs more iterations than " +
                std::to_string(max_iterations));
        }
    }
}

// ---------------------------------------------------------------------------
// Statistics

Stats compute_stats(const std::vector<double>& values) {
    Stats s;
    s.count = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    s.max = values.front();
    s.min = values.front();
    for (double v : values) {
        sum += v;
        s.max = std::max(s.max, v);
        s.min = std::min(s.min, v);
    }
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        sq += (v - s.mean) * (v - s.mean);
    }
    s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

Stats ReportRow::dsc_stats() const {
    std::vector<double> values;
    for (const CaseResult& c : cases) {
        if (c.ok()) values.push_back(c.dsc);
    }
    return compute_stats(values);
}

std::optional<Stats> ReportRow::iteration_stats() const {
    std::vector<double> values;
    for (const CaseResult& c : cases) {
        if (c.ok() && c.iterations) values.push_back(*c.iterations);
    }
    if (values.empty()) return std::nullopt;
    return compute_stats(values);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Trajectory {
    std::vector<double> dsc_by_t; // index t: DSC(Z^(t), Y); t = 0 is coarse
    std::vector<double> d_by_t;   // index t-1: inter-iteration DSC d^(t)
};

// Mask and d^(t) are constant after an exact fixed point, so a trajectory
// that stopped early still determines every later iteration.
double dsc_at(const Trajectory& traj, int t) {
    auto last = static_cast<int>(traj.dsc_by_t.size()) - 1;
    return traj.dsc_by_t[std::min(t, last)];
}

double d_at(const Trajectory& traj, int t) {
    auto n = static_cast<int>(traj.d_by_t.size());
    if (t <= n) return traj.d_by_t[t - 1];
    return 1.0;
}

} // namespace

EvalReport evaluate(const std::vector<EvalCase>& cases,
                    const ModelProvider& models, const EvalConfig& config) {
    config.validate();

    EvalReport report;
    report.rows.reserve(config.rows.size());
    for (const RowSpec& row : config.rows) {
        report.rows.push_back(ReportRow{row.label(), {}});
    }

    for (const EvalCase& c : cases) {
        std::vector<CaseResult> results(config.rows.size());
        try {
            auto [coarse_models, fine_models] = models(c);

            bool needs_loop = false;
            for (const RowSpec& row : config.rows) {
                needs_loop |= row.kind != RowSpec::Kind::OracleBox;
            }

            Trajectory traj;
            if (needs_loop) {
                FixpointConfig run_cfg;
                run_cfg.threshold = 1.0; // only an exact fixed point stops early
                run_cfg.max_iterations = config.max_iterations;
                run_cfg.margins = config.margins;
                run_cfg.empty_mask_policy = config.empty_mask_policy;
                auto result = run_fixpoint(
                    c.volume, coarse_models, fine_models, run_cfg,
                    [&](int, const Mask3D& mask) {
                        traj.dsc_by_t.push_back(dsc(mask, c.truth));
                    });
                for (const auto& it : result.trace.iterations) {
                    traj.d_by_t.push_back(it.inter_dsc);
                }
            }

            for (std::size_t i = 0; i < config.rows.size(); ++i) {
                const RowSpec& row = config.rows[i];
                CaseResult r;
                r.case_id = c.id;
                switch (row.kind) {
                case RowSpec::Kind::Coarse:
                    r.dsc = dsc_at(traj, 0);
                    break;
                case RowSpec::Kind::AfterIterations:
                    r.dsc = dsc_at(traj, row.iterations);
                    r.iterations = row.iterations;
                    break;
                case RowSpec::Kind::Threshold: {
                    int stop = config.max_iterations;
                    for (int t = 1; t <= config.max_iterations; ++t) {
                        if (d_at(traj, t) >= row.threshold) {
                            stop = t;
                            break;
                        }
                    }
                    r.dsc = dsc_at(traj, stop);
                    r.iterations = stop;
                    break;
                }
                case RowSpec::Kind::Best: {
                    int best_t = 1;
                    int horizon = std::max(
                        1, static_cast<int>(traj.dsc_by_t.size()) - 1);
                    for (int t = 2; t <= horizon; ++t) {
                        if (dsc_at(traj, t) > dsc_at(traj, best_t)) best_t = t;
                    }
                    r.dsc = dsc_at(traj, best_t);
                    r.iterations = best_t;
                    break;
                }
                case RowSpec::Kind::OracleBox:
                    r.dsc = dsc(run_with_oracle_box(c.volume, fine_models,
                                                    c.truth, config.margins),
                                c.truth);
                    break;
                }
                results[i] = std::move(r);
            }
        } catch (const std::exception& e) {
            for (std::size_t i = 0; i < config.rows.size(); ++i) {
                results[i] = CaseResult{c.id, 0.0, std::nullopt, e.what()};
            }
        }
        for (std::size_t i = 0; i < config.rows.size(); ++i) {
            report.rows[i].cases.push_back(std::move(results[i]));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV / markdown emission

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        out += ch;
    }
    out += "\"";
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_percent_pair(const Stats& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", 100.0 * s.mean,
                  100.0 * s.stddev);
    return buf;
}

std::string format_percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
    return buf;
}

} // namespace

std::string report_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "method,case_id,dsc,iterations,status\n";
    for (const ReportRow& row : report.rows) {
        for (const CaseResult& c : row.cases) {
            os << csv_escape(row.method) << "," << csv_escape(c.case_id)
               << ",";
            if (c.ok()) os << format_double(c.dsc);
            os << ",";
            if (c.iterations) os << format_double(*c.iterations);
            os << "," << (c.ok() ? "ok" : csv_escape(c.error)) << "\n";
        }
    }
    return os.str();
}

EvalReport parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        line != "method,case_id,dsc,iterations,status") {
        throw std::invalid_argument("report CSV header missing or unknown");
    }
    EvalReport report;
    std::map<std::string, std::size_t> row_index;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 5) {
            throw std::invalid_argument("report CSV row with " +
                                        std::to_string(fields.size()) +
                                        " fields: '" + line + "'");
        }
        auto [it, inserted] =
            row_index.try_emplace(fields[0], report.rows.size());
        if (inserted) {
            report.rows.push_back(ReportRow{fields[0], {}});
        }
        CaseResult c;
        c.case_id = fields[1];
        if (fields[4] != "ok") {
            c.error = fields[4];
        } else {
            c.dsc = std::stod(fields[2]);
        }
        if (!fields[3].empty()) c.iterations = std::stod(fields[3]);
        report.rows[it->second].cases.push_back(std::move(c));
    }
    return report;
}

std::string report_markdown(const EvalReport& report) {
    std::ostringstream os;
    os << "| Method | Mean DSC | # Iterations | Max DSC | Min DSC |\n";
    os << "| --- | --- | --- | --- | --- |\n";
    for (const ReportRow& row : report.rows) {
        Stats d = row.dsc_stats();
        os << "| " << row.method << " | ";
        if (d.count == 0) {
            os << "- | - | - | - |\n";
            continue;
        }
        os << format_percent_pair(d) << " | ";
        if (auto it = row.iteration_stats()) {
            char buf[64];
            if (it->stddev > 0.0) {
                std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", it->mean,
                              it->stddev);
            } else {
                std::snprintf(buf, sizeof(buf), "%g", it->mean);
            }
            os << buf;
        } else {
            os << "-";
        }
        os << " | " << format_percent(d.max) << " | " << format_percent(d.min)
           << " |\n";
        std::size_t errored = 0;
        for (const CaseResult& c : row.cases) errored += !c.ok();
        if (errored > 0) {
            // surfaced in-table so failures cannot hide in the aggregates
            os << "| ^ errored cases: " << errored << " | | | | |\n";
        }
    }
    os << "\nDSC in percent; spread is the population standard deviation.\n";
    return os.str();
}

} // namespace c2f
