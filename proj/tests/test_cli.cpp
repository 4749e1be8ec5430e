// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "edgetap/cli.hpp"
#include "test_support.hpp"

namespace e = edgetap;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = e::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) { return (support::tmp_dir() / ("cli_" + name)).string(); }

// Reads "key=value" tokens and "KEY value" lines from human output.
double field(const std::string& text, const std::string& key) {
    const std::regex re("(^|[\\s])" + key + "[= ]([-+0-9.eE]+|-?inf|nan)");
    std::smatch m;
    if (!std::regex_search(text, m, re)) {
        ADD_FAILURE() << "no " << key << " in\n" << text;
        return NAN;
    }
    return std::stod(m[2]);
}

const std::string& exp1_log() {
    static const std::string path = [] {
        const auto p = tmp("exp1.csv");
        const auto r = cli({"simulate", "exp1", "exp1", "-o", p});
        EXPECT_EQ(r.code, 0) << r.err;
        return p;
    }();
    return path;
}

const std::vector<std::string> kPredict = {"predict", "exp3", "--w", "3.119", "--h", "3.119", "--margin-x", "0",
                                           "--margin-y", "0", "--edge-x", "pos", "--edge-y", "neg"};

}  // namespace

TEST(CliPredict, MatchesLibrary) {
    const auto k = support::preset("exp3");
    const e::TargetLayout t{{3.119, 0.0, e::EdgeSide::Positive}, {3.119, 0.0, e::EdgeSide::Negative}};
    const auto want = e::predict_2d(t, k);

    const auto r = cli(kPredict);
    ASSERT_EQ(r.code, 0) << r.err;
    std::ostringstream line;
    line << "SR " << std::setprecision(6) << want.sr << '\n';
    EXPECT_EQ(r.out.substr(0, line.str().size()), line.str());

    auto args = kPredict;
    args.push_back("--json");
    const auto rj = cli(args);
    ASSERT_EQ(rj.code, 0) << rj.err;
    const auto j = nlohmann::json::parse(rj.out);
    EXPECT_EQ(j["sr"].get<double>(), want.sr);
    EXPECT_EQ(j["sr_x"].get<double>(), want.x.sr);
    EXPECT_EQ(j["y"]["alpha"].get<double>(), want.y.params.alpha);
    EXPECT_EQ(j["x"]["gamma1"].get<double>(), want.x.moments.gamma1);
}

TEST(CliPredict, HumanAndJsonCarrySameValues) {
    auto args = kPredict;
    args.push_back("--baseline");
    const auto h = cli(args);
    args.push_back("--json");
    const auto j = nlohmann::json::parse(cli(args).out);
    ASSERT_EQ(h.code, 0);
    auto same = [](double human, double full) { return std::abs(human - full) <= 5e-6 * std::abs(full) + 1e-300; };
    EXPECT_TRUE(same(field(h.out, "SR"), j["sr"].get<double>()));
    EXPECT_TRUE(same(field(h.out, "SR_x"), j["sr_x"].get<double>()));
    EXPECT_TRUE(same(field(h.out, "SR_y"), j["sr_y"].get<double>()));
    const auto xline = h.out.substr(h.out.find("\nx "));
    const auto yline = h.out.substr(h.out.find("\ny "));
    for (const char* key : {"gamma1", "sigma2", "mu", "xi", "omega", "alpha"}) {
        EXPECT_TRUE(same(field(xline, key), j["x"][key].get<double>())) << key;
        EXPECT_TRUE(same(field(yline, key), j["y"][key].get<double>())) << key;
    }
    const auto base = h.out.substr(h.out.find("baseline"));
    EXPECT_TRUE(same(field(base, "SR"), j["baseline"]["sr"].get<double>()));
    EXPECT_TRUE(same(field(base, "sigma2_x"), j["baseline"]["sigma2_x"].get<double>()));
}

TEST(CliPredict, ValidationExitsTwoNamingFlag) {
    auto missing = kPredict;
    missing.erase(missing.begin() + 2, missing.begin() + 4);
    auto r = cli(missing);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--w"), std::string::npos) << r.err;

    auto neg = kPredict;
    neg[3] = "-1";
    r = cli(neg);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--w"), std::string::npos) << r.err;

    auto margin = kPredict;
    margin[7] = "-0.5";
    r = cli(margin);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--margin-x"), std::string::npos) << r.err;

    auto edge = kPredict;
    edge[11] = "left";
    r = cli(edge);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--edge-x"), std::string::npos) << r.err;

    auto unknown = kPredict;
    unknown.push_back("--bogus");
    EXPECT_EQ(cli(unknown).code, 2);
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"predict", "no-such-preset", "--w", "1", "--h", "1", "--margin-x", "0", "--margin-y", "0"}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliPredict, NonPositiveVarianceExitsThree) {
    auto doc = e::constants_to_json(e::resolve_constants("exp1"));
    doc["x"]["e"] = -10.0;
    const auto path = tmp("bad_constants.json");
    support::spill(path, doc.dump());
    const auto r = cli({"predict", path, "--w", "1", "--h", "1", "--margin-x", "0", "--margin-y", "0", "--edge-x", "neg"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("e="), std::string::npos) << r.err;
}

TEST(CliSimulate, RowCountAndDeterminism) {
    const auto& log = exp1_log();
    const auto trials = support::slurp(log);
    const auto d = e::resolve_design("exp1");
    EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'),
              static_cast<long>(d.conditions().size() * d.repetitions * d.participants + 1));
    const auto again = tmp("exp1_again.csv");
    ASSERT_EQ(cli({"simulate", "exp1", "exp1", "-o", again}).code, 0);
    EXPECT_TRUE(support::slurp(again) == trials);
    const auto other = tmp("exp1_seed7.csv");
    ASSERT_EQ(cli({"simulate", "exp1", "exp1", "--seed", "7", "-o", other}).code, 0);
    EXPECT_FALSE(support::slurp(other) == trials);

    const auto stdout_run = cli({"simulate", "exp1", "exp1"});
    EXPECT_TRUE(stdout_run.out == trials);
    const auto jl = cli({"simulate", "exp1", "exp1", "--format", "jsonl"});
    EXPECT_EQ(jl.out.front(), '{');
}

TEST(CliFit, RecoversThresholdAndIsByteStable) {
    const auto out1 = tmp("fit1.json"), out2 = tmp("fit2.json");
    const auto r = cli({"fit", exp1_log(), "--axis", "x", "--template", "exp1", "-o", out1});
    ASSERT_EQ(r.code, 0) << r.err;
    const double thr = field(r.out, "-c/d =");
    EXPECT_NEAR(thr, 6.40, 0.5) << r.out;
    ASSERT_EQ(cli({"fit", exp1_log(), "--axis", "x", "--template", "exp1", "-o", out2}).code, 0);
    EXPECT_EQ(support::slurp(out1), support::slurp(out2));

    const auto doc = nlohmann::json::parse(support::slurp(out1));
    EXPECT_EQ(doc["preset_name"], "fit");
    EXPECT_NEAR(doc["metrics"]["x"]["threshold_mm"].get<double>(), thr, 1e-5 * thr);
    EXPECT_GE(doc["metrics"]["x"]["sr"]["r2"].get<double>(), 0.9);
    // The unfitted axis comes from the template untouched.
    EXPECT_EQ(doc["y"]["c"].get<double>(), 1.20);
    // The written file is itself a loadable constants file.
    const auto back = e::load_constants(out1);
    EXPECT_NEAR(back.constants.x.threshold(), thr, 1e-5 * thr);

    const auto j = cli({"fit", exp1_log(), "--axis", "x", "--template", "exp1", "--json"});
    EXPECT_EQ(j.out, support::slurp(out1));
}

TEST(CliFit, Failures) {
    const auto one = tmp("one_condition.csv");
    std::string text =
        "participant,size_x_mm,size_y_mm,margin_x_mm,margin_y_mm,edge_x,edge_y,tap_x_mm,tap_y_mm,repetition\n";
    for (int i = 0; i < 10; ++i) text += "p01,3,3,0,0,neg,neg," + std::to_string(0.1 * i) + ",0.2," + std::to_string(i) + "\n";
    support::spill(one, text);
    auto r = cli({"fit", one});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("fit failed"), std::string::npos) << r.err;

    r = cli({"fit", exp1_log(), "--axis", "x"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--template"), std::string::npos);

    // Exp-1 has no edge on y, so a two-axis fit cannot run.
    r = cli({"fit", exp1_log()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("axis y"), std::string::npos) << r.err;

    const auto bad = tmp("bad.csv");
    support::spill(bad, text + "p01,3,3,0,0,neg,neg,oops,0.2,11\n");
    r = cli({"fit", bad});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 12"), std::string::npos) << r.err;
    EXPECT_EQ(cli({"fit", tmp("missing.csv")}).code, 2);
}

TEST(CliFit, ResidualsExport) {
    const auto res = tmp("res.csv");
    ASSERT_EQ(cli({"fit", exp1_log(), "--axis", "x", "--template", "exp1", "--residuals", res}).code, 0);
    const auto text = support::slurp(res);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 46);
}

TEST(CliLoocv, HumanAndJson) {
    const auto h = cli({"loocv", exp1_log(), "--axis", "x"});
    ASSERT_EQ(h.code, 0) << h.err;
    const auto j = nlohmann::json::parse(cli({"loocv", exp1_log(), "--axis", "x", "--json"}).out);
    EXPECT_EQ(j["x"]["folds"].size(), 45u);
    EXPECT_NEAR(field(h.out, "R2"), j["x"]["metrics"]["r2"].get<double>(), 5e-6);
    EXPECT_GT(j["x"]["metrics"]["r2"].get<double>(), 0.85);
}

TEST(CliLrtest, TableAndEmptyLog) {
    const auto r = cli({"lrtest", exp1_log(), "--axis", "x"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 46);
    EXPECT_EQ(r.out.rfind("axis,size_mm,margin_mm,edge,d_edge_mm,n,statistic,p_value", 0), 0u);

    const auto empty = tmp("empty.csv");
    support::spill(empty,
                   "participant,size_x_mm,size_y_mm,margin_x_mm,margin_y_mm,edge_x,edge_y,tap_x_mm,tap_y_mm,repetition\n");
    const auto e1 = cli({"lrtest", empty});
    EXPECT_EQ(e1.code, 0);
    EXPECT_EQ(std::count(e1.out.begin(), e1.out.end(), '\n'), 1);
    const auto blank = tmp("blank.csv");
    support::spill(blank, "");
    EXPECT_EQ(cli({"lrtest", blank}).code, 0);

    const auto small = tmp("small.csv");
    support::spill(small, support::slurp(empty) + "p,3,3,0,0,neg,neg,0.1,0.1,1\np,3,3,0,0,neg,neg,0.2,0.3,2\n");
    const auto s = cli({"lrtest", small, "--outlier", "none"});
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.err.find("skipped"), std::string::npos);
}

TEST(CliLrtest, NormalDataMostlyNotSignificant) {
    // Far from every edge the generating skewness is zero.
    auto d = e::resolve_design("exp1");
    d.x.margins = {10.0, 15.0, 20.0, 25.0};
    nlohmann::json dj = {{"name", "far"},
                         {"x", {{"sizes", d.x.sizes}, {"margins", d.x.margins}, {"edge", "neg"}}},
                         {"y", {{"sizes", {15.596}}, {"margins", {63.45}}, {"edge", "none"}}},
                         {"repetitions", 24},
                         {"participants", 15},
                         {"seed", 5}};
    const auto design = tmp("far_design.json");
    support::spill(design, dj.dump());
    const auto log = tmp("far.csv");
    ASSERT_EQ(cli({"simulate", "exp1", design, "-o", log}).code, 0);
    const auto r = cli({"lrtest", log, "--axis", "x"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    int rows = 0, not_sig = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
        ++rows;
        not_sig += std::stod(f[7]) > 0.05;
    }
    EXPECT_EQ(rows, 20);
    EXPECT_GE(not_sig, 16);
}

TEST(CliConvert, CsvJsonlRoundTrip) {
    const auto jl = tmp("exp1.jsonl"), back = tmp("exp1_back.csv");
    ASSERT_EQ(cli({"convert", exp1_log(), jl}).code, 0);
    ASSERT_EQ(cli({"convert", jl, back}).code, 0);
    EXPECT_TRUE(support::slurp(back) == support::slurp(exp1_log()));
}

TEST(CliPipeline, RerunsAreByteIdentical) {
    std::vector<std::string> outputs;
    for (int rep = 0; rep < 2; ++rep) {
        const auto log = tmp("pipe.csv");
        const auto fit = tmp("pipe.json");
        fs::remove(log);
        fs::remove(fit);
        ASSERT_EQ(cli({"simulate", "exp3", "exp3", "-o", log}).code, 0);
        const auto f = cli({"fit", log, "-o", fit});
        ASSERT_EQ(f.code, 0) << f.err;
        const auto p = cli({"predict", fit, "--w", "3.119", "--h", "5.459", "--margin-x", "1.56", "--margin-y", "0",
                            "--edge-x", "pos", "--edge-y", "neg", "--json"});
        ASSERT_EQ(p.code, 0) << p.err;
        outputs.push_back(support::slurp(log) + support::slurp(fit) + f.out + p.out);
    }
    EXPECT_TRUE(outputs[0] == outputs[1]);
}
