#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semsentry/episodes.hpp"
#include "semsentry/errors.hpp"

// Converts a frame's detections into the natural-language scene description
// consumed by the prompt templates.

namespace semsentry {

/// Object x predicate vocabulary. nominal_subset lists the objects treated
/// as background scenery by the scenario generator.
struct Vocabulary {
    std::vector<std::string> objects;
    std::vector<std::string> predicates;
    std::vector<std::string> nominal_subset;

    bool contains_object(const std::string& label) const {
        return std::find(objects.begin(), objects.end(), label) != objects.end();
    }

    friend bool operator==(const Vocabulary&, const Vocabulary&) = default;
};

inline void validate(const Vocabulary& v) {
    if (v.objects.empty()) throw ValidationError("vocabulary objects must be nonempty");
    for (const std::string& s : v.nominal_subset) {
        if (!v.contains_object(s))
            throw ValidationError("nominal_subset entry '" + s + "' missing from objects");
    }
}

inline void to_json(json& j, const Vocabulary& v) {
    j = json{{"objects", v.objects},
             {"predicates", v.predicates},
             {"nominal_subset", v.nominal_subset}};
}

inline void from_json(const json& j, Vocabulary& v) {
    v.objects = j.at("objects").get<std::vector<std::string>>();
    v.predicates = j.at("predicates").get<std::vector<std::string>>();
    v.nominal_subset = j.at("nominal_subset").get<std::vector<std::string>>();
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("vocabulary file " + path.string() + ": " + e.what());
    }
    Vocabulary v = j.get<Vocabulary>();
    validate(v);
    return v;
}

inline void save_vocabulary(const Vocabulary& v, const std::filesystem::path& path) {
    validate(v);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write vocabulary file: " + path.string());
    out << json(v).dump(2) << '\n';
}

inline const std::vector<std::string>& manip_colors() {
    static const std::vector<std::string> colors = {"red",    "blue",  "green", "yellow", "orange",
                                                    "purple", "gray",  "brown", "white",  "pink"};
    return colors;
}

/// Default vocabulary with driving and manipulation entries. The driving side
/// pairs common street objects with positional predicates; the manipulation
/// side enumerates colored blocks/bowls and the tabletop distractor objects.
inline Vocabulary default_vocabulary() {
    Vocabulary v;
    v.objects = {
        // driving
        "car", "truck", "bus", "motorcycle", "cyclist", "pedestrian", "building", "tree",
        "street sign", "stop sign", "traffic light", "bridge", "fire hydrant", "bench",
        "billboard", "airplane", "boat", "elephant", "robot", "train",
        // manipulation distractors
        "android toy", "ball puzzle", "black sandal", "bull figure", "butterfinger chocolate",
        "c-clamp", "can opener", "dog toy statue", "honey dipper",
        "magnifying glass with green ring", "mario figure", "nintendo 3ds", "nintendo cartridge",
        "pepsi next box", "pepsi wild cherry box", "pink towel", "porcelain spoon", "purple tape",
        "flashlight", "red cup", "rocket raccoon figure", "screw driver", "silver tape",
        "spatula with purple head"};
    for (const std::string& color : manip_colors()) {
        v.objects.push_back(color + " block");
        v.objects.push_back(color + " bowl");
    }
    v.predicates = {"",
                    "on the road",
                    "near the road",
                    "on the sidewalk",
                    "at the intersection",
                    "above the road",
                    "on the bridge",
                    "in an adjacent lane",
                    "crossing the street",
                    "parked by the road",
                    "by the roadside",
                    "on a truck",
                    "on a billboard",
                    "on the table"};
    v.nominal_subset = {"car",      "truck",        "bus",          "motorcycle",  "cyclist",
                        "pedestrian", "building",   "tree",         "street sign", "stop sign",
                        "traffic light", "bridge",  "fire hydrant", "bench"};
    return v;
}

// ---------------------------------------------------------------------------
// Scene descriptions

enum class OrderKind { as_detected, lexicographic, shuffled };

inline const char* to_string(OrderKind k) {
    switch (k) {
        case OrderKind::as_detected: return "as_detected";
        case OrderKind::lexicographic: return "lexicographic";
        case OrderKind::shuffled: return "shuffled";
    }
    return "?";
}

inline OrderKind order_kind_from_string(const std::string& s) {
    for (OrderKind k : {OrderKind::as_detected, OrderKind::lexicographic, OrderKind::shuffled}) {
        if (s == to_string(k)) return k;
    }
    throw ParseError("unknown order policy: '" + s + "'");
}

struct OrderPolicy {
    OrderKind kind = OrderKind::as_detected;
    std::uint64_t seed = 0; // used by shuffled only

    static OrderPolicy as_detected() { return {OrderKind::as_detected, 0}; }
    static OrderPolicy lexicographic() { return {OrderKind::lexicographic, 0}; }
    static OrderPolicy shuffled(std::uint64_t seed) { return {OrderKind::shuffled, seed}; }

    friend bool operator==(const OrderPolicy&, const OrderPolicy&) = default;
};

/// Ordered object phrases ("a traffic light on a truck"), one per retained
/// detection group. unknown_label_count tallies detections whose label was
/// not in the vocabulary (they still render verbatim).
struct SceneDescription {
    std::vector<std::string> lines;
    OrderPolicy order_policy;
    int unknown_label_count = 0;

    bool empty() const { return lines.empty(); }

    friend bool operator==(const SceneDescription&, const SceneDescription&) = default;
};

inline std::string indefinite_article(const std::string& phrase) {
    if (phrase.empty()) return "a";
    switch (std::tolower(static_cast<unsigned char>(phrase.front()))) {
        case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
        default: return "a";
    }
}

/// "a(n) <label> <predicate>" with the predicate omitted when empty.
inline std::string object_phrase(const Detection& d) {
    std::string phrase = indefinite_article(d.label) + " " + d.label;
    if (!d.predicate.empty()) phrase += " " + d.predicate;
    return phrase;
}

namespace detail {

inline void shuffle_lines(std::vector<std::string>& lines, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = lines.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(lines[i - 1], lines[pick(rng)]);
    }
}

} // namespace detail

/// Render a frame as a scene description. Duplicate (label, predicate) pairs
/// collapse to one line with a count suffix. Pure in (frame, vocab, policy).
inline SceneDescription describe(const Frame& frame, const Vocabulary& vocab,
                                 OrderPolicy policy = OrderPolicy::as_detected()) {
    SceneDescription desc;
    desc.order_policy = policy;

    std::vector<std::pair<std::string, int>> groups; // phrase -> multiplicity, first-seen order
    for (const Detection& d : frame.detections) {
        if (!vocab.contains_object(d.label)) ++desc.unknown_label_count;
        const std::string phrase = object_phrase(d);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == phrase; });
        if (it == groups.end()) {
            groups.emplace_back(phrase, 1);
        } else {
            ++it->second;
        }
    }

    for (const auto& [phrase, count] : groups) {
        desc.lines.push_back(count == 1 ? phrase
                                        : phrase + " (" + std::to_string(count) + "x)");
    }

    switch (policy.kind) {
        case OrderKind::as_detected:
            break;
        case OrderKind::lexicographic:
            std::sort(desc.lines.begin(), desc.lines.end());
            break;
        case OrderKind::shuffled:
            detail::shuffle_lines(desc.lines, policy.seed);
            break;
    }
    return desc;
}

/// Deterministically permute the lines of an existing description. The line
/// multiset is preserved exactly.
inline SceneDescription permute_description(const SceneDescription& desc, std::uint64_t seed) {
    SceneDescription out = desc;
    out.order_policy = OrderPolicy::shuffled(seed);
    detail::shuffle_lines(out.lines, seed);
    return out;
}

/// The "- <phrase>" bullet list bound into prompt templates. Empty
/// descriptions render as an empty string.
inline std::string bullet_list(const SceneDescription& desc) {
    std::string out;
    for (std::size_t i = 0; i < desc.lines.size(); ++i) {
        if (i > 0) out += '\n';
        out += "- " + desc.lines[i];
    }
    return out;
}

} // namespace semsentry
