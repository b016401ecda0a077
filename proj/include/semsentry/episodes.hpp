#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semsentry/errors.hpp"

// Core data model: observations, episodes, verdicts, and the line-delimited
// file persistence shared by every other module. All values are immutable
// after construction; validation is total (a value either satisfies its
// invariants or loading/writing throws a typed error).

namespace semsentry {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enumerations

enum class ScenarioClass {
    nominal_stop,
    nominal_light,
    anomalous_stop,
    anomalous_light,
    strange_object,
    manip_baseline,
    manip_neutral,
    manip_semantic,
};

enum class AnomalyKind {
    stop_sign,
    traffic_light,
    strange_object,
    semantic_distractor,
    neutral_distractor,
};

enum class TaskOutcome { success, failure };

enum class Classification { normal, anomaly };

inline constexpr ScenarioClass kAllScenarioClasses[] = {
    ScenarioClass::nominal_stop,    ScenarioClass::nominal_light,
    ScenarioClass::anomalous_stop,  ScenarioClass::anomalous_light,
    ScenarioClass::strange_object,  ScenarioClass::manip_baseline,
    ScenarioClass::manip_neutral,   ScenarioClass::manip_semantic,
};

inline const char* to_string(ScenarioClass c) {
    switch (c) {
        case ScenarioClass::nominal_stop: return "nominal_stop";
        case ScenarioClass::nominal_light: return "nominal_light";
        case ScenarioClass::anomalous_stop: return "anomalous_stop";
        case ScenarioClass::anomalous_light: return "anomalous_light";
        case ScenarioClass::strange_object: return "strange_object";
        case ScenarioClass::manip_baseline: return "manip_baseline";
        case ScenarioClass::manip_neutral: return "manip_neutral";
        case ScenarioClass::manip_semantic: return "manip_semantic";
    }
    return "?";
}

inline ScenarioClass scenario_class_from_string(const std::string& s) {
    for (ScenarioClass c : kAllScenarioClasses) {
        if (s == to_string(c)) return c;
    }
    throw ParseError("unknown scenario_class: '" + s + "'");
}

inline const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::stop_sign: return "stop_sign";
        case AnomalyKind::traffic_light: return "traffic_light";
        case AnomalyKind::strange_object: return "strange_object";
        case AnomalyKind::semantic_distractor: return "semantic_distractor";
        case AnomalyKind::neutral_distractor: return "neutral_distractor";
    }
    return "?";
}

inline AnomalyKind anomaly_kind_from_string(const std::string& s) {
    for (AnomalyKind k : {AnomalyKind::stop_sign, AnomalyKind::traffic_light,
                          AnomalyKind::strange_object, AnomalyKind::semantic_distractor,
                          AnomalyKind::neutral_distractor}) {
        if (s == to_string(k)) return k;
    }
    throw ParseError("unknown anomaly_kind: '" + s + "'");
}

inline const char* to_string(TaskOutcome o) {
    return o == TaskOutcome::success ? "success" : "failure";
}

inline TaskOutcome task_outcome_from_string(const std::string& s) {
    if (s == "success") return TaskOutcome::success;
    if (s == "failure") return TaskOutcome::failure;
    throw ParseError("unknown task_outcome: '" + s + "'");
}

inline const char* to_string(Classification c) {
    return c == Classification::normal ? "normal" : "anomaly";
}

inline Classification classification_from_string(const std::string& s) {
    if (s == "normal") return Classification::normal;
    if (s == "anomaly") return Classification::anomaly;
    throw ParseError("unknown classification: '" + s + "'");
}

inline bool is_nominal_class(ScenarioClass c) {
    return c == ScenarioClass::nominal_stop || c == ScenarioClass::nominal_light ||
           c == ScenarioClass::manip_baseline;
}

inline bool is_manip_class(ScenarioClass c) {
    return c == ScenarioClass::manip_baseline || c == ScenarioClass::manip_neutral ||
           c == ScenarioClass::manip_semantic;
}

// ---------------------------------------------------------------------------
// Domain types

/// One detected object: a label paired with a descriptive predicate
/// (possibly empty, e.g. "traffic light" / "on a truck").
struct Detection {
    std::string label;
    std::string predicate;
    double confidence = 1.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// One evaluated observation. The embedding and external detector scores are
/// optional so the language-monitor pipeline and the numeric baselines can
/// share one corpus.
struct Frame {
    int timestep = 0;
    double time_s = 0.0;
    std::vector<Detection> detections;
    std::optional<std::vector<double>> embedding;
    std::map<std::string, double> external_scores;

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Contiguous timestep range (inclusive) during which a ground-truth anomaly
/// is in view. The unit of true-positive / false-negative accounting.
struct VisibilityInterval {
    int start = 0;
    int end = 0;
    AnomalyKind anomaly_kind = AnomalyKind::stop_sign;

    bool contains(int timestep) const { return timestep >= start && timestep <= end; }

    friend bool operator==(const VisibilityInterval&, const VisibilityInterval&) = default;
};

/// A timestamped sequence of frames with ground-truth anomaly visibility
/// intervals; the unit of evaluation.
struct Episode {
    std::string id;
    ScenarioClass scenario_class = ScenarioClass::nominal_stop;
    std::vector<Frame> frames;
    std::vector<VisibilityInterval> anomaly_intervals;
    std::optional<TaskOutcome> task_outcome;
    std::optional<std::string> task_spec;

    bool in_any_interval(int timestep) const {
        return std::any_of(anomaly_intervals.begin(), anomaly_intervals.end(),
                           [&](const VisibilityInterval& iv) { return iv.contains(timestep); });
    }

    friend bool operator==(const Episode&, const Episode&) = default;
};

/// Parsed monitor output for one frame: per-object classifications plus the
/// overall decision and the full response text.
struct MonitorVerdict {
    std::string episode_id;
    int timestep = 0;
    std::vector<std::pair<std::string, Classification>> per_object;
    Classification overall = Classification::normal;
    std::string rationale;

    friend bool operator==(const MonitorVerdict&, const MonitorVerdict&) = default;
};

/// Outcome of evaluating one frame. Unparseable responses and per-frame
/// backend failures are first-class outcomes, never coerced to "normal".
enum class VerdictStatus { ok, unparseable, backend_error };

inline const char* to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::ok: return "ok";
        case VerdictStatus::unparseable: return "unparseable";
        case VerdictStatus::backend_error: return "backend_error";
    }
    return "?";
}

inline VerdictStatus verdict_status_from_string(const std::string& s) {
    for (VerdictStatus v : {VerdictStatus::ok, VerdictStatus::unparseable,
                            VerdictStatus::backend_error}) {
        if (s == to_string(v)) return v;
    }
    throw ParseError("unknown verdict status: '" + s + "'");
}

struct VerdictRecord {
    std::string episode_id;
    int timestep = 0;
    VerdictStatus status = VerdictStatus::ok;
    std::optional<MonitorVerdict> verdict; // present iff status == ok
    std::string error;                     // reason when status != ok

    bool ok() const { return status == VerdictStatus::ok; }

    friend bool operator==(const VerdictRecord&, const VerdictRecord&) = default;
};

// ---------------------------------------------------------------------------
// Validation

inline void validate(const Detection& d) {
    if (d.label.empty()) throw ValidationError("detection label must be nonempty");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
        throw ValidationError("detection confidence out of [0,1]: " + std::to_string(d.confidence));
}

inline void validate(const Frame& f) {
    if (f.timestep < 0) throw ValidationError("frame timestep must be nonnegative");
    if (!(f.time_s >= 0.0)) throw ValidationError("frame time_s must be nonnegative");
    for (const Detection& d : f.detections) validate(d);
    if (f.embedding) {
        for (double v : *f.embedding) {
            if (!std::isfinite(v)) throw ValidationError("frame embedding contains a non-finite value");
        }
    }
    for (const auto& [name, score] : f.external_scores) {
        if (name.empty()) throw ValidationError("external score name must be nonempty");
        if (!std::isfinite(score)) throw ValidationError("external score '" + name + "' is non-finite");
    }
}

inline void validate(const VisibilityInterval& iv) {
    if (iv.start < 0) throw ValidationError("interval start must be nonnegative");
    if (iv.end < iv.start)
        throw ValidationError("interval end " + std::to_string(iv.end) + " precedes start " +
                              std::to_string(iv.start));
}

inline void validate(const Episode& ep) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("episode '" + ep.id + "': " + what);
    };
    if (ep.id.empty()) throw ValidationError("episode id must be nonempty");

    int prev_timestep = -1;
    std::optional<std::size_t> embedding_len;
    for (const Frame& f : ep.frames) {
        try {
            validate(f);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
        if (f.timestep <= prev_timestep) fail("frame timesteps must be strictly increasing");
        prev_timestep = f.timestep;
        if (f.embedding) {
            if (embedding_len && *embedding_len != f.embedding->size())
                fail("frames disagree on embedding length");
            embedding_len = f.embedding->size();
        }
    }

    int prev_end = -1;
    for (const VisibilityInterval& iv : ep.anomaly_intervals) {
        try {
            validate(iv);
        } catch (const ValidationError& e) {
            fail(e.what());
        }
        if (iv.start <= prev_end) fail("anomaly intervals must be sorted and disjoint");
        prev_end = iv.end;
        if (ep.frames.empty() || iv.start < ep.frames.front().timestep ||
            iv.end > ep.frames.back().timestep)
            fail("anomaly interval [" + std::to_string(iv.start) + "," + std::to_string(iv.end) +
                 "] outside the frame range");
    }

    if (is_nominal_class(ep.scenario_class) && !ep.anomaly_intervals.empty())
        fail(std::string("scenario class ") + to_string(ep.scenario_class) +
             " must not carry anomaly intervals");
}

inline void validate(const MonitorVerdict& v) {
    if (v.episode_id.empty()) throw ValidationError("verdict episode_id must be nonempty");
    if (v.timestep < 0) throw ValidationError("verdict timestep must be nonnegative");
}

inline void validate(const VerdictRecord& r) {
    if (r.episode_id.empty()) throw ValidationError("verdict record episode_id must be nonempty");
    if (r.ok() != r.verdict.has_value())
        throw ValidationError("verdict record status/payload mismatch for episode '" +
                              r.episode_id + "'");
    if (r.verdict) validate(*r.verdict);
}

// ---------------------------------------------------------------------------
// JSON conversion (field names match the type definitions; optional fields
// are omitted when absent)

inline void to_json(json& j, const Detection& d) {
    j = json{{"label", d.label}, {"predicate", d.predicate}, {"confidence", d.confidence}};
}

inline void from_json(const json& j, Detection& d) {
    d.label = j.at("label").get<std::string>();
    d.predicate = j.at("predicate").get<std::string>();
    d.confidence = j.at("confidence").get<double>();
}

inline void to_json(json& j, const Frame& f) {
    j = json{{"timestep", f.timestep}, {"time_s", f.time_s}, {"detections", f.detections}};
    if (f.embedding) j["embedding"] = *f.embedding;
    if (!f.external_scores.empty()) j["external_scores"] = f.external_scores;
}

inline void from_json(const json& j, Frame& f) {
    f.timestep = j.at("timestep").get<int>();
    f.time_s = j.at("time_s").get<double>();
    f.detections = j.at("detections").get<std::vector<Detection>>();
    f.embedding.reset();
    if (j.contains("embedding")) f.embedding = j.at("embedding").get<std::vector<double>>();
    f.external_scores.clear();
    if (j.contains("external_scores"))
        f.external_scores = j.at("external_scores").get<std::map<std::string, double>>();
}

inline void to_json(json& j, const VisibilityInterval& iv) {
    j = json{{"start", iv.start}, {"end", iv.end}, {"anomaly_kind", to_string(iv.anomaly_kind)}};
}

inline void from_json(const json& j, VisibilityInterval& iv) {
    iv.start = j.at("start").get<int>();
    iv.end = j.at("end").get<int>();
    iv.anomaly_kind = anomaly_kind_from_string(j.at("anomaly_kind").get<std::string>());
}

inline void to_json(json& j, const Episode& ep) {
    j = json{{"id", ep.id},
             {"scenario_class", to_string(ep.scenario_class)},
             {"frames", ep.frames},
             {"anomaly_intervals", ep.anomaly_intervals}};
    if (ep.task_outcome) j["task_outcome"] = to_string(*ep.task_outcome);
    if (ep.task_spec) j["task_spec"] = *ep.task_spec;
}

inline void from_json(const json& j, Episode& ep) {
    ep.id = j.at("id").get<std::string>();
    ep.scenario_class = scenario_class_from_string(j.at("scenario_class").get<std::string>());
    ep.frames = j.at("frames").get<std::vector<Frame>>();
    ep.anomaly_intervals = j.at("anomaly_intervals").get<std::vector<VisibilityInterval>>();
    ep.task_outcome.reset();
    if (j.contains("task_outcome"))
        ep.task_outcome = task_outcome_from_string(j.at("task_outcome").get<std::string>());
    ep.task_spec.reset();
    if (j.contains("task_spec")) ep.task_spec = j.at("task_spec").get<std::string>();
}

inline void to_json(json& j, const MonitorVerdict& v) {
    json objects = json::array();
    for (const auto& [phrase, cls] : v.per_object)
        objects.push_back(json::array({phrase, to_string(cls)}));
    j = json{{"episode_id", v.episode_id},
             {"timestep", v.timestep},
             {"per_object", std::move(objects)},
             {"overall", to_string(v.overall)},
             {"rationale", v.rationale}};
}

inline void from_json(const json& j, MonitorVerdict& v) {
    v.episode_id = j.at("episode_id").get<std::string>();
    v.timestep = j.at("timestep").get<int>();
    v.per_object.clear();
    for (const json& entry : j.at("per_object")) {
        v.per_object.emplace_back(entry.at(0).get<std::string>(),
                                  classification_from_string(entry.at(1).get<std::string>()));
    }
    v.overall = classification_from_string(j.at("overall").get<std::string>());
    v.rationale = j.at("rationale").get<std::string>();
}

inline void to_json(json& j, const VerdictRecord& r) {
    j = json{{"episode_id", r.episode_id},
             {"timestep", r.timestep},
             {"status", to_string(r.status)}};
    if (r.verdict) j["verdict"] = *r.verdict;
    if (!r.error.empty()) j["error"] = r.error;
}

inline void from_json(const json& j, VerdictRecord& r) {
    r.episode_id = j.at("episode_id").get<std::string>();
    r.timestep = j.at("timestep").get<int>();
    r.status = verdict_status_from_string(j.at("status").get<std::string>());
    r.verdict.reset();
    if (j.contains("verdict")) r.verdict = j.at("verdict").get<MonitorVerdict>();
    r.error = j.value("error", std::string{});
}

// ---------------------------------------------------------------------------
// Line-delimited persistence. One self-contained JSON record per line, UTF-8.

namespace detail {

template <typename T>
inline std::vector<T> read_records(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + std::string(what) + " file: " + path.string());
    std::vector<T> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed " +
                             what + " record: " + e.what());
        }
        try {
            T value = j.get<T>();
            validate(value);
            out.push_back(std::move(value));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid " + what +
                             " record: " + e.what());
        } catch (const Error& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
inline void write_records(const std::vector<T>& records, const std::filesystem::path& path,
                          const char* what) {
    for (const T& r : records) validate(r); // no partially valid record reaches disk
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + std::string(what) + " file for writing: " + path.string());
    for (const T& r : records) {
        out << json(r).dump() << '\n';
    }
    if (!out) throw IoError("write failure on " + path.string());
}

} // namespace detail

inline void write_episodes(const std::vector<Episode>& episodes, const std::filesystem::path& path) {
    detail::write_records(episodes, path, "episode");
}

inline std::vector<Episode> read_episodes(const std::filesystem::path& path) {
    return detail::read_records<Episode>(path, "episode");
}

inline void write_verdicts(const std::vector<VerdictRecord>& records,
                           const std::filesystem::path& path) {
    detail::write_records(records, path, "verdict");
}

inline std::vector<VerdictRecord> read_verdicts(const std::filesystem::path& path) {
    return detail::read_records<VerdictRecord>(path, "verdict");
}

} // namespace semsentry
