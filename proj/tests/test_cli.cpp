#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "covidx/cli.hpp"
#include "covidx/config.hpp"
#include "covidx/error.hpp"
#include "covidx/ingestion.hpp"
#include "covidx/synthetic.hpp"
#include "support.hpp"

using namespace covidx;
using covidx::testing::read_file;
using covidx::testing::TempDir;
using covidx::testing::write_file;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string config_json(const std::string& input, const std::string& output, const std::string& space,
                        const std::string& extra = "") {
    return "{\"input\": {\"kind\": \"csv\", \"path\": \"" + input + "\"}, \"model_space\": " + space +
           ", \"output\": {\"path\": \"" + output + "\", \"format\": \"csv\"}" + extra + "}";
}

void write_synthetic(const std::filesystem::path& path, int n_obs, double missing = 0.0) {
    SyntheticSpec spec;
    spec.n_obs = std::max(n_obs, 20);
    spec.missing_rate = missing;
    Panel p = generate(spec).panel;
    if (n_obs < 20) {
        p.dates.resize(std::size_t(n_obs));
        p.values.conservativeResize(n_obs, Eigen::NoChange);
    }
    write_panel_csv(p, path);
}

std::string regional_csv(const std::vector<std::vector<int>>& rows) {
    std::string text = "data,stato,codice_regione,denominazione_regione,nuovi_positivi\n";
    for (std::size_t d = 0; d < rows.size(); ++d) {
        for (std::size_t u = 0; u < rows[d].size(); ++u) {
            text += Date(2020, 3, 1).plus_days(int(d)).iso() + "T17:00:00,ITA," + std::to_string(u) + ",Region" +
                    std::to_string(u) + "," + std::to_string(rows[d][u]) + "\n";
        }
    }
    return text;
}

const std::string kPcaOnly = "[{\"id\": \"pca\", \"family\": \"pca_full\"}]";

} // namespace

TEST(CliIndex, PcaOnlyTenRowsStartsAtHundred) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 10);
    write_file(dir / "run.json", config_json("panel.csv", "index.csv", kPcaOnly));
    const CliRun r = cli({"index", "--config", (dir / "run.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const OutputTable t = read_output_table(dir / "index.csv");
    EXPECT_EQ(t.names, (std::vector<std::string>{"index", "per_date_count", "pca"}));
    ASSERT_EQ(t.dates.size(), 10u);
    EXPECT_EQ(t.columns[0][0], 100.0);
    const std::string text = read_file(dir / "index.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "date,index,per_date_count,pca");
    EXPECT_EQ(text.substr(text.find('\n') + 1, 15), "2020-02-24,100,");
}

TEST(CliIndex, EmptyModelSpaceIsAUsageErrorNamingTheField) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 30);
    write_file(dir / "run.json", config_json("panel.csv", "index.csv", "[]"));
    const CliRun r = cli({"index", "--config", (dir / "run.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("model_space"), std::string::npos) << r.err;
}

TEST(CliIndex, MissingInputFileIsADataError) {
    TempDir dir;
    write_file(dir / "run.json", config_json("absent.csv", "index.csv", kPcaOnly));
    EXPECT_EQ(cli({"index", "--config", (dir / "run.json").string()}).code, 3);
}

TEST(CliIndex, MissingConfigAndBadJsonAreUsageErrors) {
    TempDir dir;
    EXPECT_EQ(cli({"index", "--config", (dir / "absent.json").string()}).code, 2);
    write_file(dir / "bad.json", "{\"input\": ");
    EXPECT_EQ(cli({"index", "--config", (dir / "bad.json").string()}).code, 2);
    write_file(dir / "unknown.json",
               config_json("panel.csv", "index.csv", kPcaOnly, ", \"extra\": 1"));
    const CliRun r = cli({"index", "--config", (dir / "unknown.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("extra"), std::string::npos);
}

TEST(CliIndex, EnsembleFailureExitsFour) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 30);
    write_file(dir / "run.json",
               config_json("panel.csv", "index.csv",
                           "[{\"id\": \"a\", \"family\": \"pca_full\"},"
                           " {\"id\": \"b\", \"family\": \"pca_rolling\", \"params\": {\"window\": 60}},"
                           " {\"id\": \"c\", \"family\": \"pca_rolling\", \"params\": {\"window\": 90}}]"));
    const CliRun r = cli({"index", "--config", (dir / "run.json").string()});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.err.find("pca_rolling window 60"), std::string::npos) << r.err;
}

TEST(CliIndex, DefaultSpaceWritesMembersAndWarnings) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 150, 0.05);
    write_file(dir / "run.json", config_json("panel.csv", "index.csv", "\"default\""));
    const CliRun r = cli({"index", "--config", (dir / "run.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const OutputTable t = read_output_table(dir / "index.csv");
    // levels only: the synthetic panel has negative values
    EXPECT_EQ(t.names.size(), 2u + 7u);
    EXPECT_EQ(t.columns[1][0], 5.0);  // the two rolling members start late
    EXPECT_LE(index_reconstruction_error(t), 1e-6);
}

TEST(CliIndex, OutputIsByteIdenticalAcrossRuns) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 120, 0.05);
    write_file(dir / "run.json", config_json("panel.csv", "a.csv", "\"default\""));
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string()}).code, 0);
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string(), "--output", (dir / "b.csv").string()}).code, 0);
    EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv"));
}

TEST(CliIndex, JsonOutputHasEqualLengthArraysWithCsvNames) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 80);
    write_file(dir / "run.json",
               config_json("panel.csv", "index.csv",
                           "[{\"id\": \"pca\", \"family\": \"pca_full\"},"
                           " {\"id\": \"roll\", \"family\": \"pca_rolling\", \"params\": {\"window\": 30}}]"));
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string(), "--format", "json", "--output",
                   (dir / "index.json").string()})
                  .code,
              0);
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string()}).code, 0);
    const auto j = nlohmann::ordered_json::parse(read_file(dir / "index.json"));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.push_back(k);
        EXPECT_EQ(v.size(), 80u) << k;
    }
    EXPECT_EQ(keys, (std::vector<std::string>{"date", "index", "per_date_count", "pca", "roll"}));
    EXPECT_TRUE(j["roll"][0].is_null());
    EXPECT_FALSE(j["roll"][29].is_null());
    EXPECT_EQ(j["date"][0], "2020-02-24");
    EXPECT_EQ(j["index"][0], 100);

    const OutputTable from_json = read_output_table(dir / "index.json");
    const OutputTable from_csv = read_output_table(dir / "index.csv");
    EXPECT_EQ(from_json.names, from_csv.names);
    for (std::size_t c = 0; c < from_csv.columns.size(); ++c) {
        for (std::size_t t = 0; t < from_csv.dates.size(); ++t) {
            const double a = from_csv.columns[c][t], b = from_json.columns[c][t];
            if (std::isnan(a)) {
                EXPECT_TRUE(std::isnan(b));
            } else {
                EXPECT_EQ(a, b);
            }
        }
    }
}

TEST(CliIndex, FlagsOverrideConfig) {
    TempDir dir;
    write_synthetic(dir / "one.csv", 40);
    write_file(dir / "run.json", config_json("missing.csv", "ignored.csv", kPcaOnly));
    const CliRun r = cli({"index", "--config", (dir / "run.json").string(), "--input", (dir / "one.csv").string(),
                       "--output", (dir / "out.csv").string(), "--smoothing", "ema:0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "out.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir / "ignored.csv"));
    EXPECT_EQ(cli({"index", "--config", (dir / "run.json").string(), "--format", "xml"}).code, 2);
    EXPECT_EQ(cli({"index", "--config", (dir / "run.json").string(), "--smoothing", "ema:2"}).code, 2);
}

TEST(CliIndex, ConfiguredSpreadIsWrittenAlongside) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 30);
    write_file(dir / "regions.csv", regional_csv({{1, 1}, {4, 0}}));
    write_file(dir / "run.json", config_json("panel.csv", "index.csv", kPcaOnly,
                                             ", \"spread\": {\"input\": \"regions.csv\", \"output\": \"csi.csv\"}"));
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string()}).code, 0);
    EXPECT_EQ(read_file(dir / "csi.csv"), "date,csi\n2020-03-01,100\n2020-03-02,0\n");
}

TEST(CliSpread, SingleRegionDominantIsZero) {
    TempDir dir;
    std::vector<std::vector<int>> rows(5, std::vector<int>(21, 0));
    for (auto& r : rows) r[3] = 250;
    write_file(dir / "r.csv", regional_csv(rows));
    ASSERT_EQ(cli({"spread", "--input", (dir / "r.csv").string(), "--output", (dir / "csi.csv").string()}).code, 0);
    const OutputTable t = read_output_table(dir / "csi.csv");
    for (double v : t.columns[0]) EXPECT_EQ(v, 0.0);
}

TEST(CliSpread, UniformTwentyOneIsHundred) {
    TempDir dir;
    write_file(dir / "r.csv", regional_csv(std::vector<std::vector<int>>(4, std::vector<int>(21, 9))));
    ASSERT_EQ(cli({"spread", "--input", (dir / "r.csv").string(), "--output", (dir / "csi.json").string(),
                   "--format", "json"})
                  .code,
              0);
    const auto j = nlohmann::json::parse(read_file(dir / "csi.json"));
    for (const auto& v : j["csi"]) EXPECT_EQ(v.get<double>(), 100.0);
}

TEST(CliSpread, ZeroTotalDayIsEmptyCell) {
    TempDir dir;
    write_file(dir / "r.csv", regional_csv({{3, 3}, {0, 0}, {2, 2}}));
    ASSERT_EQ(cli({"spread", "--input", (dir / "r.csv").string(), "--output", (dir / "csi.csv").string()}).code, 0);
    EXPECT_EQ(read_file(dir / "csi.csv"), "date,csi\n2020-03-01,100\n2020-03-02,\n2020-03-03,100\n");
}

TEST(CliSpread, SmoothingAndSchemaErrors) {
    TempDir dir;
    write_file(dir / "r.csv", regional_csv({{4, 0}, {0, 4}}));
    ASSERT_EQ(cli({"spread", "--input", (dir / "r.csv").string(), "--output", (dir / "csi.csv").string(),
                   "--smoothing", "moving_average:2"})
                  .code,
              0);
    EXPECT_EQ(read_file(dir / "csi.csv"), "date,csi\n2020-03-01,0\n2020-03-02,100\n");
    write_file(dir / "bad.csv", "data,denominazione_regione\n2020-03-01,A\n");
    const CliRun r = cli({"spread", "--input", (dir / "bad.csv").string(), "--output", (dir / "x.csv").string()});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("nuovi_positivi"), std::string::npos);
}

TEST(CliSimulate, FixedSeedIsByteIdentical) {
    TempDir dir;
    const CliRun a = cli({"simulate", "--seed", "7", "--output", (dir / "a").string()});
    const CliRun b = cli({"simulate", "--seed", "7", "--output", (dir / "b").string()});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0);
    EXPECT_EQ(a.out, "seed 7\n");
    EXPECT_EQ(read_file(dir / "a.panel.csv"), read_file(dir / "b.panel.csv"));
    EXPECT_EQ(read_file(dir / "a.factor.csv"), read_file(dir / "b.factor.csv"));
}

TEST(CliSimulate, InvalidFlagsExitTwo) {
    TempDir dir;
    EXPECT_EQ(cli({"simulate", "--n-vars", "1", "--output", (dir / "x").string()}).code, 2);
    EXPECT_EQ(cli({"simulate", "--process", "garch", "--output", (dir / "x").string()}).code, 2);
    EXPECT_EQ(cli({"simulate", "--loadings", "1,abc", "--output", (dir / "x").string()}).code, 2);
    EXPECT_EQ(cli({"simulate", "--start", "yesterday", "--output", (dir / "x").string()}).code, 2);
    EXPECT_EQ(cli({"simulate", "--n-obs", "ten", "--output", (dir / "x").string()}).code, 2);
    EXPECT_EQ(cli({"simulate"}).code, 2);
}

TEST(CliSimulate, DefaultFilesParseBack) {
    TempDir dir;
    const CliRun r = cli({"simulate", "--output", (dir / "sim").string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "seed 20200224\n");
    const Panel panel = parse_panel_csv(dir / "sim.panel.csv", "date");
    const Panel factor = parse_panel_csv(dir / "sim.factor.csv", "date");
    const SyntheticData truth = generate(SyntheticSpec{});
    EXPECT_EQ(panel.rows(), 300);
    EXPECT_EQ(panel.variables, truth.panel.variables);
    EXPECT_EQ(panel.missing_count(), truth.panel.missing_count());
    ASSERT_EQ(factor.rows(), 300);
    for (Eigen::Index t = 0; t < factor.rows(); ++t) EXPECT_EQ(factor.values(t, 0), truth.factor[std::size_t(t)]);
}

TEST(CliSimulate, CustomSpecFlags) {
    TempDir dir;
    ASSERT_EQ(cli({"simulate", "--n-obs", "25", "--n-vars", "3", "--loadings", "1,2,3", "--noise-sd", "0",
                   "--missing-rate", "0", "--process", "ar1", "--phi", "0.3", "--start", "2021-01-01", "--output",
                   (dir / "s").string()})
                  .code,
              0);
    const Panel p = parse_panel_csv(dir / "s.panel.csv", "date");
    const Panel f = parse_panel_csv(dir / "s.factor.csv", "date");
    EXPECT_EQ(p.dates.front(), Date(2021, 1, 1));
    for (Eigen::Index t = 0; t < p.rows(); ++t) EXPECT_EQ(p.values(t, 2), 3.0 * f.values(t, 0));
}

TEST(CliVerify, AcceptsIndexOutputAndRejectsTampering) {
    TempDir dir;
    write_synthetic(dir / "panel.csv", 120, 0.05);
    write_file(dir / "run.json", config_json("panel.csv", "index.csv", "\"default\""));
    ASSERT_EQ(cli({"index", "--config", (dir / "run.json").string()}).code, 0);
    const CliRun ok = cli({"verify", "--input", (dir / "index.csv").string()});
    EXPECT_EQ(ok.code, 0) << ok.err;

    std::string text = read_file(dir / "index.csv");
    const auto row = text.find("\n2020-03-10,");
    const auto cell = text.find(',', row + 1) + 1;
    text.replace(cell, text.find(',', cell) - cell, "123.456");
    write_file(dir / "tampered.csv", text);
    EXPECT_EQ(cli({"verify", "--input", (dir / "tampered.csv").string()}).code, 3);
}

TEST(CliMisc, HelpUnknownCommandAndDefaultConfig) {
    EXPECT_EQ(cli({"--help"}).code, 0);
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    const CliRun r = cli({"default-config"});
    ASSERT_EQ(r.code, 0);
    const RunConfig cfg = parse_run_config(r.out);
    EXPECT_EQ(cfg.input.kind, InputConfig::Kind::dpc_national);
    EXPECT_TRUE(cfg.default_model_space);
    ASSERT_TRUE(cfg.spread.has_value());
}

TEST(Config, ParsesFullSchema) {
    const RunConfig cfg = parse_run_config(R"({
        "input": {"kind": "csv", "path": "p.csv", "date_column": "day", "columns": ["a", "b"]},
        "preprocess": {"smoothing": {"method": "ema", "alpha": 0.25},
                       "em": {"max_iter": 50, "tol": 1e-8, "ridge": 0.0},
                       "reference_exclude": []},
        "model_space": [
            {"id": "r", "family": "pca_rolling", "transform": "first_difference", "params": {"window": 14}},
            {"family": "ica", "params": {"n_components": 3, "seed": 9, "nonlinearity": "logcosh"}},
            {"family": "sparse_filtering", "transform": {"kind": "positivity_ratio", "numerator": "a", "denominator": "b"}}
        ],
        "output": {"path": "o.json", "format": "json"}
    })");
    EXPECT_EQ(cfg.input.date_column, "day");
    EXPECT_EQ(cfg.input.columns, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(cfg.preprocess.smoothing.kind, Smoothing::Kind::ema);
    EXPECT_EQ(cfg.preprocess.smoothing.alpha, 0.25);
    EXPECT_EQ(cfg.preprocess.em.max_iter, 50);
    EXPECT_TRUE(cfg.preprocess.reference_exclude.empty());
    ASSERT_EQ(cfg.model_space.size(), 3u);
    EXPECT_EQ(std::get<PcaRollingParams>(cfg.model_space[0].params).window, 14);
    EXPECT_EQ(cfg.model_space[0].transform.kind, TransformKind::first_difference);
    EXPECT_EQ(cfg.model_space[1].id, "ica.levels");
    EXPECT_EQ(std::get<IcaParams>(cfg.model_space[1].params).n_components, 3);
    EXPECT_EQ(std::get<IcaParams>(cfg.model_space[1].params).seed, 9u);
    EXPECT_EQ(cfg.model_space[2].transform.numerator, "a");
    EXPECT_EQ(cfg.output.format, OutputFormat::json);
    EXPECT_FALSE(cfg.default_model_space);
}

TEST(Config, RejectsInvalidDocuments) {
    const std::string ok_io = R"("input": {"path": "p.csv"}, "output": {"path": "o.csv"})";
    auto doc = [&](const std::string& rest) { return "{" + ok_io + ", " + rest + "}"; };
    EXPECT_NO_THROW(parse_run_config(doc(R"("model_space": "default")")));
    EXPECT_THROW(parse_run_config(doc(R"("model_space": "everything")")), ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "cointegration"}])")), ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "pca_full"}, {"family": "pca_full"}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "pca_rolling", "params": {"window": 2}}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "pca_full", "params": {"window": 5}}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "ica", "params": {"nonlinearity": "cube"}}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "sparse_filtering", "params": {"n_features": 1}}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": [{"family": "pca_full", "transform": "sqrt"}])")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(R"({"input": {"path": "p.csv"}, "model_space": "default"})"), ConfigError);
    EXPECT_THROW(parse_run_config(
                     R"({"input": {"path": "p.csv"}, "output": {"path": "o", "format": "xlsx"}, "model_space": "default"})"),
                 ConfigError);
    EXPECT_THROW(parse_run_config(
                     R"({"input": {"kind": "excel", "path": "p"}, "output": {"path": "o"}, "model_space": "default"})"),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": "default", "preprocess": {"smoothing": {"method": "ema", "alpha": 0}})")),
                 ConfigError);
    EXPECT_THROW(parse_run_config(doc(R"("model_space": "default", "preprocess": {"em": {"max_iter": 0}})")),
                 ConfigError);
}

TEST(Config, ParseSmoothingStrings) {
    EXPECT_EQ(parse_smoothing("none").kind, Smoothing::Kind::none);
    EXPECT_EQ(parse_smoothing("ema:0.4").alpha, 0.4);
    EXPECT_EQ(parse_smoothing("ma:7").window, 7);
    EXPECT_EQ(parse_smoothing("moving_average:3").window, 3);
    for (const char* bad : {"ema", "ema:", "ema:1.5", "ma:0", "ma:2.5", "gaussian:3", ""}) {
        EXPECT_THROW(parse_smoothing(bad), ConfigError) << bad;
    }
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
    TempDir dir;
    write_file(dir / "run.json", config_json("data/p.csv", "/abs/out.csv", kPcaOnly));
    const RunConfig cfg = load_run_config(dir / "run.json");
    EXPECT_EQ(cfg.input.path, dir / "data/p.csv");
    EXPECT_EQ(cfg.output.path, std::filesystem::path("/abs/out.csv"));
}

TEST(Config, DefaultSpaceAddsLogVariantsOnlyForPositiveData) {
    RunConfig cfg;
    cfg.default_model_space = true;
    SyntheticSpec spec;
    spec.n_obs = 40;
    Panel p = generate(spec).panel;
    EXPECT_EQ(resolve_model_space(cfg, p).size(), 7u);
    p.values = p.values.array().abs() + 1.0;
    EXPECT_EQ(resolve_model_space(cfg, p).size(), 14u);
}
