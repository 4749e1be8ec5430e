// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Command-line front end. run() takes the arguments after the program name
// and returns the process exit code: 0 success, 2 usage or validation
// error, 3 computation failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgetap/constants_io.hpp"
#include "edgetap/error.hpp"
#include "edgetap/estimation.hpp"
#include "edgetap/predictor.hpp"
#include "edgetap/service.hpp"
#include "edgetap/simulation.hpp"
#include "edgetap/taplog.hpp"

namespace edgetap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCompute = 3;

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string g6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

inline std::vector<TapTrial> read_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
    std::istringstream is(text);
    return parse_tap_log(is, format_from_path(path));
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path);
    out << text;
    if (!out) throw ParameterError("failed writing " + path);
}

struct PreprocessOptions {
    std::string outlier = "3sd";
    double iqr_k = 3.0;
    std::string outlier_axes = "both";
    std::string aggregation = "per-participant";
    std::string skewness = "biased";
};

inline void add_preprocess_options(CLI::App* sub, PreprocessOptions& p) {
    sub->add_option("--outlier", p.outlier, "Outlier rule per participant and condition")
        ->check(CLI::IsMember({"none", "3sd", "iqr"}))
        ->capture_default_str();
    sub->add_option("--iqr-k", p.iqr_k, "Fence multiplier for --outlier iqr")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--outlier-axes", p.outlier_axes, "Coordinates the outlier rule inspects")
        ->check(CLI::IsMember({"x", "y", "both"}))
        ->capture_default_str();
    sub->add_option("--aggregation", p.aggregation, "How condition moments are formed")
        ->check(CLI::IsMember({"per-participant", "pooled"}))
        ->capture_default_str();
    sub->add_option("--skewness", p.skewness, "Sample skewness estimator")
        ->check(CLI::IsMember({"biased", "adjusted"}))
        ->capture_default_str();
}

inline AxisSelection parse_axes(const std::string& s) {
    if (s == "x") return AxisSelection::X;
    if (s == "y") return AxisSelection::Y;
    return AxisSelection::Both;
}

inline std::vector<Axis> axes_of(const std::string& s) {
    if (s == "x") return {Axis::X};
    if (s == "y") return {Axis::Y};
    return {Axis::X, Axis::Y};
}

inline FilterResult filter(const std::vector<TapTrial>& trials, const PreprocessOptions& p) {
    if (p.outlier == "3sd") return filter_outliers_3sd(trials, parse_axes(p.outlier_axes));
    if (p.outlier == "iqr") return filter_outliers_iqr(trials, p.iqr_k, parse_axes(p.outlier_axes));
    return {trials, {}, {}};
}

struct Prepared {
    std::vector<TapTrial> kept;
    std::size_t removed = 0;
    std::vector<ConditionAggregate> conditions;
};

inline Prepared prepare(const std::string& log, const PreprocessOptions& p, std::ostream& err) {
    Prepared out;
    auto filtered = filter(read_log(log), p);
    for (const auto& w : filtered.warnings) err << "warning: " << w << '\n';
    out.removed = filtered.removed.size();
    out.kept = std::move(filtered.kept);
    const auto mode = p.aggregation == "pooled" ? AggregationMode::Pooled : AggregationMode::PerParticipant;
    const auto est = p.skewness == "adjusted" ? SkewnessEstimator::Adjusted : SkewnessEstimator::Biased;
    auto agg = aggregate(out.kept, mode, est);
    for (const auto& w : agg.warnings) err << "warning: " << w << '\n';
    out.conditions = std::move(agg.conditions);
    return out;
}

inline void print_axis_line(std::ostream& out, char name, const AxisGeometry& geo, const AxisPrediction& p) {
    out << name << " gamma1=" << g6(p.moments.gamma1) << " sigma2=" << g6(p.moments.sigma2)
        << " mu=" << g6(p.moments.mu) << " xi=" << g6(p.params.xi) << " omega=" << g6(p.params.omega)
        << " alpha=" << g6(p.params.alpha) << " d_edge=" << g6(geo.d_edge())
        << " region=" << (p.skew_region ? "edge" : "far") << '\n';
}

inline void print_metrics(std::ostream& out, const char* label, const Metrics& m) {
    out << "  " << label << " R2=" << g6(m.r2) << " MAE=" << g6(m.mae) << " RMSE=" << g6(m.rmse)
        << " MAPE=" << g6(m.mape) << "% n=" << m.n << '\n';
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string constants;
    double w = 0.0, h = 0.0, margin_x = 0.0, margin_y = 0.0;
    std::string edge_x = "none", edge_y = "none";
    bool baseline = false;
    bool json = false;
};

inline int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const auto file = resolve_constants(a.constants);
    TargetLayout layout{{a.w, a.margin_x, parse_edge_side(a.edge_x)}, {a.h, a.margin_y, parse_edge_side(a.edge_y)}};
    const auto& k = file.constants;
    const auto pred = predict_2d(layout, k);
    std::optional<BaselinePrediction> base;
    if (a.baseline) base = baseline_2d(layout, k);

    if (a.json) {
        Json j;
        j["sr"] = pred.sr;
        j["sr_x"] = pred.x.sr;
        j["sr_y"] = pred.y.sr;
        j["x"] = service::detail::axis_json(layout.x, pred.x, k.x);
        j["y"] = service::detail::axis_json(layout.y, pred.y, k.y);
        if (base) {
            j["baseline"] = {{"sr", base->sr}, {"sr_x", base->sr_x}, {"sr_y", base->sr_y},
                             {"sigma2_x", base->sigma2_x}, {"sigma2_y", base->sigma2_y}};
        }
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << "SR " << g6(pred.sr) << '\n';
    out << "SR_x " << g6(pred.x.sr) << '\n';
    out << "SR_y " << g6(pred.y.sr) << '\n';
    print_axis_line(out, 'x', layout.x, pred.x);
    print_axis_line(out, 'y', layout.y, pred.y);
    if (base) {
        out << "baseline SR=" << g6(base->sr) << " SR_x=" << g6(base->sr_x) << " SR_y=" << g6(base->sr_y)
            << " sigma2_x=" << g6(base->sigma2_x) << " sigma2_y=" << g6(base->sigma2_y) << '\n';
    }
    return kExitOk;
}

struct FitArgs {
    std::string log;
    std::string axis = "both";
    PreprocessOptions pre;
    std::string variance_target = "sigma_squared";
    bool weighted = false;
    std::string output;
    std::string templ;
    std::string residuals;
    bool json = false;
};

inline FitOptions fit_options(const std::string& target, bool weighted) {
    FitOptions o;
    o.target = parse_variance_target(target);
    o.weight_by_trials = weighted;
    return o;
}

inline int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const auto axes = axes_of(a.axis);
    if (axes.size() == 1 && a.templ.empty()) {
        throw ParameterError("--template: required with --axis " + a.axis + " to supply the other axis");
    }
    ConstantsFile file;
    if (!a.templ.empty()) file = resolve_constants(a.templ);
    const auto prep = prepare(a.log, a.pre, err);
    const auto opt = fit_options(a.variance_target, a.weighted);

    Json metrics;
    std::ostringstream residuals;
    bool first = true;
    std::vector<FitReport> reports;
    for (Axis axis : axes) {
        FitReport rep;
        try {
            rep = fit_all(prep.conditions, axis, opt);
        } catch (const FitError& e) {
            throw FitError("axis " + std::string(to_string(axis)) + ": " + e.what());
        }
        auto& k = axis == Axis::X ? file.constants.x : file.constants.y;
        auto& b = axis == Axis::X ? file.constants.baseline_x : file.constants.baseline_y;
        k = rep.constants;
        if (rep.baseline) {
            b = *rep.baseline;
        } else if (a.templ.empty()) {
            throw FitError("axis " + std::string(to_string(axis)) +
                           ": baseline needs at least two distinct sizes; pass --template to borrow one");
        } else {
            err << "warning: axis " << to_string(axis) << " baseline kept from template\n";
        }
        metrics[std::string(to_string(axis))] = fit_report_metrics_json(rep);
        write_residuals_csv(residuals, rep, first);
        first = false;
        reports.push_back(std::move(rep));
    }
    file.preset_name = "fit";
    file.source = "fitted from " + std::filesystem::path(a.log).filename().string();

    Json doc = constants_to_json(file);
    doc["metrics"] = metrics;
    doc["fit"] = {{"axes", a.axis},
                  {"outlier", a.pre.outlier},
                  {"aggregation", a.pre.aggregation},
                  {"skewness", a.pre.skewness},
                  {"variance_target", a.variance_target},
                  {"weighted", a.weighted},
                  {"trials_kept", prep.kept.size()},
                  {"trials_removed", prep.removed},
                  {"conditions", prep.conditions.size()}};
    const std::string text = doc.dump(2) + "\n";
    if (!a.output.empty()) write_text(a.output, text);
    if (!a.residuals.empty()) write_text(a.residuals, residuals.str());

    if (a.json) {
        out << text;
        return kExitOk;
    }
    for (const auto& rep : reports) {
        const auto& k = rep.constants;
        out << "axis " << to_string(rep.axis) << ": threshold -c/d = " << g6(rep.threshold) << " mm\n";
        out << "  c=" << g6(k.c) << " d=" << g6(k.d) << " e=" << g6(k.e) << " f=" << g6(k.f) << " g=" << g6(k.g)
            << " h=" << g6(k.h) << " i=" << g6(k.i) << " j=" << g6(k.j) << " k=" << g6(k.k) << " l=" << g6(k.l)
            << '\n';
        if (rep.mean_degenerate) out << "  mean fit is degenerate (flat), k=0 and l=0 reported\n";
        if (rep.baseline) out << "  baseline a=" << g6(rep.baseline->a) << " b=" << g6(rep.baseline->b) << '\n';
        print_metrics(out, "gamma1", rep.gamma1);
        print_metrics(out, "sigma", rep.sigma);
        print_metrics(out, "mu", rep.mu);
        print_metrics(out, "SR", rep.sr);
        if (rep.baseline_sr) print_metrics(out, "baseline SR", *rep.baseline_sr);
    }
    if (!a.output.empty()) out << "wrote " << a.output << '\n';
    return kExitOk;
}

struct LoocvArgs {
    std::string log;
    std::string axis = "x";
    PreprocessOptions pre;
    std::string variance_target = "sigma_squared";
    bool weighted = false;
    bool json = false;
};

inline int cmd_loocv(const LoocvArgs& a, std::ostream& out, std::ostream& err) {
    const auto prep = prepare(a.log, a.pre, err);
    const auto opt = fit_options(a.variance_target, a.weighted);
    Json doc;
    std::ostringstream human;
    for (Axis axis : axes_of(a.axis)) {
        LoocvResult r;
        try {
            r = loocv(prep.conditions, axis, opt);
        } catch (const FitError& e) {
            throw FitError("axis " + std::string(to_string(axis)) + ": " + e.what());
        }
        Json folds = Json::array(), skipped = Json::array();
        human << "axis " << to_string(axis) << ": " << r.folds.size() << " folds, " << r.skipped.size()
              << " skipped\n";
        for (const auto& f : r.folds) {
            folds.push_back({{"size_mm", f.geometry.size},
                             {"margin_mm", f.geometry.margin},
                             {"edge", to_string(f.geometry.edge)},
                             {"predicted_sr", f.predicted},
                             {"observed_sr", f.observed}});
            human << "  size=" << g6(f.geometry.size) << " margin=" << g6(f.geometry.margin)
                  << " predicted=" << g6(f.predicted) << " observed=" << g6(f.observed) << '\n';
        }
        for (const auto& [geo, why] : r.skipped) {
            skipped.push_back({{"size_mm", geo.size}, {"margin_mm", geo.margin}, {"reason", why}});
            err << "note: fold size=" << g6(geo.size) << " margin=" << g6(geo.margin) << " skipped: " << why << '\n';
        }
        print_metrics(human, "SR", r.metrics);
        const std::string key(to_string(axis));
        doc[key]["metrics"] = metrics_to_json(r.metrics);
        doc[key]["folds"] = std::move(folds);
        doc[key]["skipped"] = std::move(skipped);
    }
    out << (a.json ? doc.dump(2) + "\n" : human.str());
    return kExitOk;
}

struct SimulateArgs {
    std::string constants;
    std::string design;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format = "csv";
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const auto file = resolve_constants(a.constants);
    auto design = resolve_design(a.design);
    if (a.seed) design.seed = *a.seed;
    const auto trials = synth_experiment(file.constants, design);
    if (a.output.empty()) {
        write_tap_log(out, trials, a.format == "jsonl" ? LogFormat::Jsonl : LogFormat::Csv);
        return kExitOk;
    }
    std::ostringstream buf;
    write_tap_log(buf, trials, format_from_path(a.output));
    write_text(a.output, buf.str());
    err << "wrote " << trials.size() << " trials to " << a.output << '\n';
    return kExitOk;
}

struct LrtestArgs {
    std::string log;
    std::string axis = "both";
    std::string group_by = "condition";
    PreprocessOptions pre;
    std::string output;
};

inline constexpr std::size_t kMinLrSamples = 8;

inline int cmd_lrtest(const LrtestArgs& a, std::ostream& out, std::ostream& err) {
    auto filtered = filter(read_log(a.log), a.pre);
    for (const auto& w : filtered.warnings) err << "warning: " << w << '\n';
    std::map<TargetLayout, std::vector<const TapTrial*>> groups;
    for (const auto& t : filtered.kept) groups[t.layout].push_back(&t);

    std::ostringstream csv;
    csv << "axis,size_mm,margin_mm,edge,d_edge_mm,n,statistic,p_value,llf_normal,llf_skewnormal,xi,omega,alpha,"
           "converged\n";
    using edgetap::detail::format_number;
    for (Axis axis : axes_of(a.axis)) {
        for (const auto& [layout, members] : groups) {
            const auto& geo = axis == Axis::X ? layout.x : layout.y;
            std::vector<const TapTrial*> sorted = members;
            std::sort(sorted.begin(), sorted.end(), [](const TapTrial* p, const TapTrial* q) {
                return std::tie(p->participant, p->repetition, p->tap_x, p->tap_y) <
                       std::tie(q->participant, q->repetition, q->tap_x, q->tap_y);
            });
            std::vector<double> v;
            for (const auto* t : sorted) v.push_back(axis == Axis::X ? t->tap_x : t->tap_y);
            if (v.size() < kMinLrSamples) {
                err << "note: axis " << to_string(axis) << " condition size=" << g6(geo.size)
                    << " margin=" << g6(geo.margin) << " skipped: " << v.size() << " samples (need "
                    << kMinLrSamples << ")\n";
                continue;
            }
            LRTestResult r;
            try {
                r = lr_test(v);
            } catch (const FitError& e) {
                err << "note: axis " << to_string(axis) << " condition size=" << g6(geo.size)
                    << " margin=" << g6(geo.margin) << " skipped: " << e.what() << '\n';
                continue;
            }
            csv << to_string(axis) << ',' << format_number(geo.size) << ',' << format_number(geo.margin) << ','
                << to_string(geo.edge) << ',' << format_number(geo.d_edge()) << ',' << r.n << ','
                << format_number(r.statistic) << ',' << format_number(r.p_value) << ','
                << format_number(r.llf_normal) << ',' << format_number(r.llf_skewnormal) << ','
                << format_number(r.params.xi) << ',' << format_number(r.params.omega) << ','
                << format_number(r.params.alpha) << ',' << (r.converged ? 1 : 0) << '\n';
        }
    }
    if (a.output.empty()) {
        out << csv.str();
    } else {
        write_text(a.output, csv.str());
    }
    return kExitOk;
}

struct ConvertArgs {
    std::string input;
    std::string output;
};

inline int cmd_convert(const ConvertArgs& a) {
    const auto trials = read_log(a.input);
    std::ostringstream buf;
    write_tap_log(buf, trials, format_from_path(a.output));
    write_text(a.output, buf.str());
    return kExitOk;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace detail;
    CLI::App app{"Edge-aware touch success-rate model", "edgetap"};
    app.require_subcommand(1, 1);

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "Predict success rate for one target layout");
    // --h is the target height, so help is long-form only here.
    predict->set_help_flag("--help", "Print this help message and exit");
    predict->add_option("constants", pa.constants, "Constants file or preset name")->required();
    predict->add_option("--w", pa.w, "Target width, mm")->required()->check(CLI::PositiveNumber);
    predict->add_option("--h", pa.h, "Target height, mm")->required()->check(CLI::PositiveNumber);
    predict->add_option("--margin-x", pa.margin_x, "Gap to the nearest x edge, mm")
        ->required()
        ->check(CLI::NonNegativeNumber);
    predict->add_option("--margin-y", pa.margin_y, "Gap to the nearest y edge, mm")
        ->required()
        ->check(CLI::NonNegativeNumber);
    predict->add_option("--edge-x", pa.edge_x, "Side of the nearest x edge")
        ->check(CLI::IsMember({"neg", "pos", "none"}))
        ->capture_default_str();
    predict->add_option("--edge-y", pa.edge_y, "Side of the nearest y edge")
        ->check(CLI::IsMember({"neg", "pos", "none"}))
        ->capture_default_str();
    predict->add_flag("--baseline", pa.baseline, "Also print the edge-unaware baseline prediction");
    predict->add_flag("--json", pa.json, "Machine-readable output");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit model constants from a tap log");
    fit->add_option("log", fa.log, "Tap log (.csv or .jsonl)")->required();
    fit->add_option("--axis", fa.axis)->check(CLI::IsMember({"x", "y", "both"}))->capture_default_str();
    add_preprocess_options(fit, fa.pre);
    fit->add_option("--variance-target", fa.variance_target)
        ->check(CLI::IsMember({"sigma_squared", "sigma"}))
        ->capture_default_str();
    fit->add_flag("--weighted", fa.weighted, "Weight conditions by trial count");
    fit->add_option("-o,--output", fa.output, "Write the constants file here");
    fit->add_option("--template", fa.templ, "Constants file or preset supplying axes that are not fitted");
    fit->add_option("--residuals", fa.residuals, "Write per-condition residuals as CSV");
    fit->add_flag("--json", fa.json, "Print the constants document instead of the summary");

    LoocvArgs la;
    auto* cv = app.add_subcommand("loocv", "Leave-one-condition-out cross-validation");
    cv->add_option("log", la.log)->required();
    cv->add_option("--axis", la.axis)->check(CLI::IsMember({"x", "y", "both"}))->capture_default_str();
    add_preprocess_options(cv, la.pre);
    cv->add_option("--variance-target", la.variance_target)
        ->check(CLI::IsMember({"sigma_squared", "sigma"}))
        ->capture_default_str();
    cv->add_flag("--weighted", la.weighted);
    cv->add_flag("--json", la.json);

    SimulateArgs sa;
    std::uint64_t seed = 0;
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic tap log");
    sim->add_option("constants", sa.constants)->required();
    sim->add_option("design", sa.design, "Design file or preset name")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "Override the design seed");
    sim->add_option("-o,--output", sa.output, "Output log; format follows the extension");
    sim->add_option("--format", sa.format, "Format when writing to stdout")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();

    LrtestArgs ra;
    auto* lr = app.add_subcommand("lrtest", "Normal vs skew-normal likelihood ratio per condition");
    lr->add_option("log", ra.log)->required();
    lr->add_option("--axis", ra.axis)->check(CLI::IsMember({"x", "y", "both"}))->capture_default_str();
    lr->add_option("--group-by", ra.group_by)->check(CLI::IsMember({"condition"}))->capture_default_str();
    add_preprocess_options(lr, ra.pre);
    lr->add_option("-o,--output", ra.output, "Write the table here instead of stdout");

    ConvertArgs ca;
    auto* conv = app.add_subcommand("convert", "Convert a tap log between CSV and JSONL");
    conv->add_option("input", ca.input)->required();
    conv->add_option("output", ca.output)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (seed_opt->count()) sa.seed = seed;

    try {
        if (*predict) return cmd_predict(pa, out);
        if (*fit) return cmd_fit(fa, out, err);
        if (*cv) return cmd_loocv(la, out, err);
        if (*sim) return cmd_simulate(sa, out, err);
        if (*lr) return cmd_lrtest(ra, out, err);
        if (*conv) return cmd_convert(ca);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FitError& e) {
        err << "error: fit failed: " << e.what() << '\n';
        return kExitCompute;
    } catch (const ModelDomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitCompute;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCompute;
    }
    return kExitUsage;
}

}  // namespace edgetap::cli
