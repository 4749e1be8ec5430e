// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Tap-log ingestion (CSV / JSON Lines), per-group outlier rules and
// per-condition aggregation into moments and observed success rates.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgetap/error.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/stats.hpp"

namespace edgetap {

struct TapTrial {
    std::string participant;
    TargetLayout layout;
    double tap_x = 0.0;  ///< mm relative to target center
    double tap_y = 0.0;
    std::int64_t repetition = 0;

    bool operator==(const TapTrial&) const = default;
};

enum class LogFormat { Csv, Jsonl };

inline LogFormat format_from_path(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson") return LogFormat::Jsonl;
    return LogFormat::Csv;
}

inline constexpr std::array<std::string_view, 10> kTapLogColumns = {
    "participant", "size_x_mm", "size_y_mm", "margin_x_mm", "margin_y_mm",
    "edge_x",      "edge_y",    "tap_x_mm",  "tap_y_mm",    "repetition"};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view s, std::size_t line, std::string_view field) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ParseError(line, std::string(field), "not a finite number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::int64_t parse_integer(std::string_view s, std::size_t line, std::string_view field) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line, std::string(field), "not an integer: '" + std::string(s) + "'");
    }
    return v;
}

inline EdgeSide parse_edge_field(std::string_view s, std::size_t line, std::string_view field) {
    try {
        return parse_edge_side(s);
    } catch (const ParameterError& e) {
        throw ParseError(line, std::string(field), e.what());
    }
}

inline void validate_trial(const TapTrial& t, std::size_t line) {
    if (t.participant.empty()) throw ParseError(line, "participant", "empty identifier");
    if (!(t.layout.x.size > 0.0)) throw ParseError(line, "size_x_mm", "must be positive");
    if (!(t.layout.y.size > 0.0)) throw ParseError(line, "size_y_mm", "must be positive");
    if (!(t.layout.x.margin >= 0.0)) throw ParseError(line, "margin_x_mm", "must be nonnegative");
    if (!(t.layout.y.margin >= 0.0)) throw ParseError(line, "margin_y_mm", "must be nonnegative");
}

inline std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline std::vector<TapTrial> parse_csv(std::istream& in) {
    std::vector<TapTrial> out;
    std::string raw;
    std::size_t line_no = 0;
    std::array<std::size_t, kTapLogColumns.size()> col{};
    std::size_t header_width = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
        if (line.empty()) continue;
        auto fields = split_commas(line);
        if (!have_header) {
            col.fill(static_cast<std::size_t>(-1));
            for (std::size_t i = 0; i < fields.size(); ++i) {
                for (std::size_t c = 0; c < kTapLogColumns.size(); ++c) {
                    if (fields[i] == kTapLogColumns[c]) {
                        if (col[c] != static_cast<std::size_t>(-1)) {
                            throw ParseError(line_no, std::string(fields[i]), "duplicate column");
                        }
                        col[c] = i;
                    }
                }
            }
            for (std::size_t c = 0; c < kTapLogColumns.size(); ++c) {
                if (col[c] == static_cast<std::size_t>(-1)) {
                    throw ParseError(line_no, std::string(kTapLogColumns[c]), "missing header column");
                }
            }
            header_width = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != header_width) {
            throw ParseError(line_no, "row",
                             "expected " + std::to_string(header_width) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        auto get = [&](std::size_t c) { return fields[col[c]]; };
        TapTrial t;
        t.participant = std::string(get(0));
        t.layout.x.size = parse_number(get(1), line_no, kTapLogColumns[1]);
        t.layout.y.size = parse_number(get(2), line_no, kTapLogColumns[2]);
        t.layout.x.margin = parse_number(get(3), line_no, kTapLogColumns[3]);
        t.layout.y.margin = parse_number(get(4), line_no, kTapLogColumns[4]);
        t.layout.x.edge = parse_edge_field(get(5), line_no, kTapLogColumns[5]);
        t.layout.y.edge = parse_edge_field(get(6), line_no, kTapLogColumns[6]);
        t.tap_x = parse_number(get(7), line_no, kTapLogColumns[7]);
        t.tap_y = parse_number(get(8), line_no, kTapLogColumns[8]);
        t.repetition = parse_integer(get(9), line_no, kTapLogColumns[9]);
        validate_trial(t, line_no);
        out.push_back(std::move(t));
    }
    if (!have_header) throw ParseError(1, "header", "missing header line");
    return out;
}

inline std::vector<TapTrial> parse_jsonl(std::istream& in) {
    using nlohmann::json;
    std::vector<TapTrial> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, "row", e.what());
        }
        if (!obj.is_object()) throw ParseError(line_no, "row", "expected a JSON object");
        auto field = [&](std::string_view name) -> const json& {
            const auto it = obj.find(std::string(name));
            if (it == obj.end()) throw ParseError(line_no, std::string(name), "missing field");
            return *it;
        };
        auto number = [&](std::string_view name) {
            const auto& v = field(name);
            if (!v.is_number()) throw ParseError(line_no, std::string(name), "expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw ParseError(line_no, std::string(name), "not finite");
            return d;
        };
        auto text = [&](std::string_view name) {
            const auto& v = field(name);
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
            throw ParseError(line_no, std::string(name), "expected a string");
        };
        TapTrial t;
        t.participant = text("participant");
        t.layout.x.size = number("size_x_mm");
        t.layout.y.size = number("size_y_mm");
        t.layout.x.margin = number("margin_x_mm");
        t.layout.y.margin = number("margin_y_mm");
        t.layout.x.edge = parse_edge_field(text("edge_x"), line_no, "edge_x");
        t.layout.y.edge = parse_edge_field(text("edge_y"), line_no, "edge_y");
        t.tap_x = number("tap_x_mm");
        t.tap_y = number("tap_y_mm");
        const auto& rep = field("repetition");
        if (!rep.is_number_integer()) throw ParseError(line_no, "repetition", "expected an integer");
        t.repetition = rep.get<std::int64_t>();
        validate_trial(t, line_no);
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace detail

inline std::vector<TapTrial> parse_tap_log(std::istream& in, LogFormat format) {
    return format == LogFormat::Csv ? detail::parse_csv(in) : detail::parse_jsonl(in);
}

inline void write_tap_log(std::ostream& out, const std::vector<TapTrial>& trials, LogFormat format) {
    using detail::format_number;
    if (format == LogFormat::Csv) {
        for (std::size_t c = 0; c < kTapLogColumns.size(); ++c) {
            out << (c ? "," : "") << kTapLogColumns[c];
        }
        out << '\n';
        for (const auto& t : trials) {
            out << t.participant << ',' << format_number(t.layout.x.size) << ','
                << format_number(t.layout.y.size) << ',' << format_number(t.layout.x.margin) << ','
                << format_number(t.layout.y.margin) << ',' << to_string(t.layout.x.edge) << ','
                << to_string(t.layout.y.edge) << ',' << format_number(t.tap_x) << ','
                << format_number(t.tap_y) << ',' << t.repetition << '\n';
        }
        return;
    }
    for (const auto& t : trials) {
        nlohmann::ordered_json j;
        j["participant"] = t.participant;
        j["size_x_mm"] = t.layout.x.size;
        j["size_y_mm"] = t.layout.y.size;
        j["margin_x_mm"] = t.layout.x.margin;
        j["margin_y_mm"] = t.layout.y.margin;
        j["edge_x"] = to_string(t.layout.x.edge);
        j["edge_y"] = to_string(t.layout.y.edge);
        j["tap_x_mm"] = t.tap_x;
        j["tap_y_mm"] = t.tap_y;
        j["repetition"] = t.repetition;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Outlier filtering

/// Which coordinates an outlier rule inspects. A trial is removed whole if
/// any inspected coordinate trips the fence.
enum class AxisSelection { X, Y, Both };

struct FilterResult {
    std::vector<TapTrial> kept;
    std::vector<TapTrial> removed;
    std::vector<std::string> warnings;
};

namespace detail {

using GroupKey = std::pair<std::string, TargetLayout>;

inline std::map<GroupKey, std::vector<std::size_t>> group_by_participant_layout(
    const std::vector<TapTrial>& trials) {
    std::map<GroupKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        groups[{trials[i].participant, trials[i].layout}].push_back(i);
    }
    return groups;
}

inline std::string describe_group(const GroupKey& key) {
    const auto& l = key.second;
    return "participant " + key.first + ", layout (" + format_number(l.x.size) + "x" +
           format_number(l.y.size) + ", margins " + format_number(l.x.margin) + "/" +
           format_number(l.y.margin) + ", edges " + std::string(to_string(l.x.edge)) + "/" +
           std::string(to_string(l.y.edge)) + ")";
}

// fence(values) -> [lo, hi]; trials outside on any selected axis are removed.
template <class FenceFn>
FilterResult filter_by_fence(const std::vector<TapTrial>& trials, AxisSelection axes, FenceFn fence) {
    FilterResult out;
    std::vector<char> drop(trials.size(), 0);
    for (const auto& [key, idx] : group_by_participant_layout(trials)) {
        if (idx.size() < 2) {
            out.warnings.push_back("group with " + std::to_string(idx.size()) +
                                   " trial(s) kept unfiltered: " + describe_group(key));
            continue;
        }
        auto apply = [&](auto coord) {
            std::vector<double> v;
            v.reserve(idx.size());
            for (auto i : idx) v.push_back(coord(trials[i]));
            const auto [lo, hi] = fence(std::move(v));
            for (auto i : idx) {
                const double c = coord(trials[i]);
                if (c < lo || c > hi) drop[i] = 1;
            }
        };
        if (axes != AxisSelection::Y) apply([](const TapTrial& t) { return t.tap_x; });
        if (axes != AxisSelection::X) apply([](const TapTrial& t) { return t.tap_y; });
    }
    for (std::size_t i = 0; i < trials.size(); ++i) {
        (drop[i] ? out.removed : out.kept).push_back(trials[i]);
    }
    return out;
}

}  // namespace detail

/// Single pass: drop trials more than 3 sample SDs from the group mean,
/// grouped by (participant, layout).
inline FilterResult filter_outliers_3sd(const std::vector<TapTrial>& trials,
                                        AxisSelection axes = AxisSelection::Both) {
    return detail::filter_by_fence(trials, axes, [](std::vector<double> v) {
        const auto m = sample_moments(v);
        const double sd = std::sqrt(m.variance);
        return std::pair{m.mean - 3.0 * sd, m.mean + 3.0 * sd};
    });
}

/// Drop trials outside [Q1 - k IQR, Q3 + k IQR]; quartiles interpolate
/// linearly between order statistics.
inline FilterResult filter_outliers_iqr(const std::vector<TapTrial>& trials, double k = 3.0,
                                        AxisSelection axes = AxisSelection::Both) {
    if (!(k >= 0.0)) throw ParameterError("IQR multiplier must be nonnegative");
    return detail::filter_by_fence(trials, axes, [k](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const double q1 = quantile_sorted(v, 0.25);
        const double q3 = quantile_sorted(v, 0.75);
        const double iqr = q3 - q1;
        return std::pair{q1 - k * iqr, q3 + k * iqr};
    });
}

// ---------------------------------------------------------------------------
// Aggregation

enum class AggregationMode {
    PerParticipant,  ///< moments per participant, then averaged across participants
    Pooled           ///< all participants' taps pooled per condition
};

struct ConditionAggregate {
    TargetLayout layout;
    std::size_t n = 0;             ///< trials contributing
    std::size_t participants = 0;  ///< participants contributing
    SampleMoments moments_x;
    SampleMoments moments_y;
    double observed_sr = 0.0;
    double observed_sr_x = 0.0;
    double observed_sr_y = 0.0;
};

struct AggregateResult {
    std::vector<ConditionAggregate> conditions;  ///< sorted by layout
    std::vector<std::string> warnings;
};

namespace detail {

struct GroupStats {
    SampleMoments x;
    SampleMoments y;
    double sr = 0.0;
    double sr_x = 0.0;
    double sr_y = 0.0;
};

inline GroupStats group_stats(std::vector<const TapTrial*> members, SkewnessEstimator est) {
    // Canonical order so the result does not depend on input order.
    std::sort(members.begin(), members.end(), [](const TapTrial* a, const TapTrial* b) {
        return std::tie(a->participant, a->repetition, a->tap_x, a->tap_y) <
               std::tie(b->participant, b->repetition, b->tap_x, b->tap_y);
    });
    std::vector<double> xs, ys;
    std::size_t in_x = 0, in_y = 0, in_both = 0;
    for (const auto* t : members) {
        xs.push_back(t->tap_x);
        ys.push_back(t->tap_y);
        const bool ix = std::abs(t->tap_x) <= 0.5 * t->layout.x.size;
        const bool iy = std::abs(t->tap_y) <= 0.5 * t->layout.y.size;
        in_x += ix;
        in_y += iy;
        in_both += ix && iy;
    }
    const double n = static_cast<double>(members.size());
    return {sample_moments(xs, est), sample_moments(ys, est), in_both / n, in_x / n, in_y / n};
}

}  // namespace detail

inline AggregateResult aggregate(const std::vector<TapTrial>& trials, AggregationMode mode,
                                 SkewnessEstimator est = SkewnessEstimator::Biased) {
    AggregateResult out;
    std::map<TargetLayout, std::map<std::string, std::vector<const TapTrial*>>> by_condition;
    for (const auto& t : trials) by_condition[t.layout][t.participant].push_back(&t);

    for (const auto& [layout, by_participant] : by_condition) {
        ConditionAggregate agg;
        agg.layout = layout;
        if (mode == AggregationMode::Pooled) {
            std::vector<const TapTrial*> all;
            for (const auto& [p, members] : by_participant) all.insert(all.end(), members.begin(), members.end());
            const auto s = detail::group_stats(std::move(all), est);
            agg.n = s.x.n;
            agg.participants = by_participant.size();
            agg.moments_x = s.x;
            agg.moments_y = s.y;
            agg.observed_sr = s.sr;
            agg.observed_sr_x = s.sr_x;
            agg.observed_sr_y = s.sr_y;
            out.conditions.push_back(agg);
            continue;
        }
        std::vector<detail::GroupStats> per;
        for (const auto& [p, members] : by_participant) {
            if (members.size() < 3) {
                out.warnings.push_back("excluded " + detail::describe_group({p, layout}) + ": only " +
                                       std::to_string(members.size()) + " trial(s)");
                continue;
            }
            agg.n += members.size();
            per.push_back(detail::group_stats(members, est));
        }
        if (per.empty()) continue;
        const double np = static_cast<double>(per.size());
        agg.participants = per.size();
        agg.moments_x.n = agg.moments_y.n = agg.n;
        agg.moments_x.mean = agg.moments_x.variance = agg.moments_x.skewness = 0.0;
        agg.moments_y.mean = agg.moments_y.variance = agg.moments_y.skewness = 0.0;
        for (const auto& s : per) {
            agg.moments_x.mean += s.x.mean / np;
            agg.moments_x.variance += s.x.variance / np;
            agg.moments_x.skewness += s.x.skewness / np;
            agg.moments_y.mean += s.y.mean / np;
            agg.moments_y.variance += s.y.variance / np;
            agg.moments_y.skewness += s.y.skewness / np;
            agg.observed_sr += s.sr / np;
            agg.observed_sr_x += s.sr_x / np;
            agg.observed_sr_y += s.sr_y / np;
        }
        out.conditions.push_back(agg);
    }
    return out;
}

}  // namespace edgetap
