#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "strokeml/error.hpp"
#include "strokeml/io/codec.hpp"
#include "strokeml/pipeline/bundle.hpp"
#include "strokeml/pipeline/config.hpp"
#include "strokeml/pipeline/report.hpp"
#include "strokeml/pipeline/run.hpp"
#include "support.hpp"

using namespace strokeml;
using namespace strokeml::pipeline;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;  // sentinel: nothing thrown
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_table(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            else if (ch == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += ch;
            }
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

constexpr const char* kSmallBfo = R"(  population: 4
  chemotaxis_steps: 3
  swim_length: 2
  reproduction_steps: 1
  dispersal_steps: 1
)";

// Writes `n_files` blob CSVs and returns their paths.
std::vector<fs::path> blob_files(const fs::path& dir, std::size_t n_files, std::size_t per_class) {
    std::vector<fs::path> out;
    for (std::size_t f = 0; f < n_files; ++f) {
        const auto ds = fixtures::blobs(per_class, 3, 5, 2.0 + static_cast<double>(f), 100 + f);
        out.push_back(dir / ("net" + std::to_string(f) + ".csv"));
        fixtures::write_csv(out.back(), ds);
    }
    return out;
}

std::string grid_yaml(const std::vector<fs::path>& files, std::size_t k) {
    std::string y = "seed: 7\nevaluation:\n  mode: kfold\n  k: " + std::to_string(k) + "\ngrid:\n  features:\n";
    for (std::size_t f = 0; f < files.size(); ++f) {
        y += "    - path: " + files[f].string() + "\n      extractor: Net" + std::to_string(f) + "\n";
    }
    y += "  optimizers:\n    - None\n    - kind: BFO\n";
    std::istringstream bfo(kSmallBfo);
    for (std::string line; std::getline(bfo, line);) y += "    " + line + "\n";
    y += "    - kind: PCA\n      components: 3\n    - LDA\n";
    y += "  classifiers: [SVC, RF, GNB, DT, XGB, KNN, LR]\n";
    return y;
}

}  // namespace

// ------------------------------------------------------------------ config

TEST(Config, ParsesEveryField) {
    const auto c = parse_config(R"(
features: feats/resnet.csv
extractor: ResNet50
seed: 42
standardize: false
evaluation: {mode: holdout, k: 5}
optimizer:
  kind: pca
  variance: 0.9
classifier:
  kind: knn
  params: {k: 3}
)",
                                "/data");
    EXPECT_EQ(c.features_path, fs::path("/data/feats/resnet.csv"));
    EXPECT_EQ(c.extractor_tag, "ResNet50");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_FALSE(c.standardize);
    EXPECT_EQ(c.evaluation.mode, Evaluation::Mode::Holdout);
    EXPECT_EQ(c.evaluation.k, 5u);
    EXPECT_EQ(c.optimizer.kind, OptimizerKind::PCA);
    EXPECT_EQ(c.optimizer.pca_variance, 0.9);
    EXPECT_EQ(c.classifier, learn::LearnerSpec::make(learn::LearnerKind::KNN, {{"k", "3"}}));
    EXPECT_EQ(c.label(), "ResNet50+PCA+KNN");
}

TEST(Config, Defaults) {
    const auto c = parse_config("features: x.csv\nseed: 1\nclassifier: SVC\n");
    EXPECT_TRUE(c.standardize);
    EXPECT_EQ(c.evaluation.mode, Evaluation::Mode::KFold);
    EXPECT_EQ(c.evaluation.k, 10u);
    EXPECT_EQ(c.optimizer.kind, OptimizerKind::None);
    EXPECT_EQ(c.label(), "x+None+SVC");
}

TEST(Config, Rejections) {
    const std::vector<std::string> bad{
        "features: x.csv\nclassifier: SVC\n",                               // no seed
        "features: x.csv\nseed: 1\nclassifier: SVC\ncolour: red\n",          // unknown key
        "features: x.csv\nseed: -3\nclassifier: SVC\n",                      // negative seed
        "features: x.csv\nseed: 1\nclassifier: SVC\noptimizer: GA\n",        // unknown optimizer
        "features: x.csv\nseed: 1\nclassifier: SVC\noptimizer: {kind: PCA, components: 2, variance: 0.5}\n",
        "features: x.csv\nseed: 1\nclassifier: SVC\noptimizer: {kind: LDA, shrinkage: 2}\n",
        "features: x.csv\nseed: 1\nclassifier: SVC\noptimizer: {kind: BFO, population: 0}\n",
        "features: x.csv\nseed: 1\nclassifier: SVC\nevaluation: {k: 1}\n",
        "features: x.csv\nseed: 1\nclassifier: SVC\nevaluation: {mode: loo}\n",
        "seed: 1\nclassifier: SVC\n",                                        // no features
        "features: x.csv\nseed: 1\n",                                        // no classifier
        "features: [x.csv\n",                                                // broken YAML
    };
    for (const auto& y : bad) EXPECT_EQ(code_of([&] { parse_config(y); }), ErrorCode::InvalidConfig) << y;
    EXPECT_THROW(parse_config("features: x.csv\nseed: 1\nclassifier: {kind: KNN, params: {k: 0}}\n"), Error);
    EXPECT_THROW(parse_config("features: x.csv\nseed: 1\nclassifier: {kind: KNN, params: {depth: 3}}\n"), Error);
}

TEST(Config, JsonRoundTrip) {
    auto c = parse_config(std::string("features: x.csv\nseed: 3\nclassifier: RF\noptimizer:\n  kind: BFO\n") +
                          "  population: 6\n  wrapper: {kind: KNN, params: {k: 3}}\n  folds: 4\n");
    nlohmann::json j = c;
    EXPECT_EQ(j.get<PipelineConfig>(), c);
}

TEST(Grid, ExpandsExtractorMajor) {
    const auto g = parse_grid(R"(
seed: 9
grid:
  features: [a.csv, {path: b.csv, extractor: Xception}]
  optimizers: [None, LDA]
  classifiers: [GNB, DT, KNN]
)",
                              "/base");
    EXPECT_EQ(g.size(), 12u);
    const auto cells = g.expand();
    ASSERT_EQ(cells.size(), 12u);
    EXPECT_EQ(cells[0].label(), "a+None+GNB");
    EXPECT_EQ(cells[5].label(), "a+LDA+KNN");
    EXPECT_EQ(cells[6].label(), "Xception+None+GNB");
    EXPECT_EQ(cells[6].features_path, fs::path("/base/b.csv"));
    for (const auto& c : cells) EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(code_of([] { parse_grid("seed: 1\ngrid: {features: [], optimizers: [None], classifiers: [DT]}\n"); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_grid("grid: {features: [a], optimizers: [None], classifiers: [DT]}\n"); }),
              ErrorCode::InvalidConfig);
}

// ------------------------------------------------------------------ single run

TEST(Run, DeterministicApartFromTimestamp) {
    const auto dir = fixtures::scratch_dir("run-det");
    const auto files = blob_files(dir, 1, 30);
    for (const char* opt : {"None", "BFO", "PCA", "LDA"}) {
        std::string y = "features: " + files[0].string() + "\nseed: 5\nclassifier: RF\noptimizer:\n  kind: " + opt + "\n";
        if (std::string(opt) == "BFO") y += kSmallBfo;
        const auto c = parse_config(y);
        const auto a = run(c);
        const auto b = run(c);
        EXPECT_EQ(record_to_json(a.record, false).dump(), record_to_json(b.record, false).dump()) << opt;
        EXPECT_EQ(a.model->to_json().dump(), b.model->to_json().dump()) << opt;
        EXPECT_FALSE(record_to_json(a.record, false).contains("timestamp"));
        EXPECT_TRUE(record_to_json(a.record, true).contains("timestamp"));
    }
}

TEST(Run, SeedChangesFolds) {
    const auto dir = fixtures::scratch_dir("run-seed");
    const auto files = blob_files(dir, 1, 30);
    auto c = parse_config("features: " + files[0].string() + "\nseed: 5\nclassifier: KNN\n");
    const auto a = run(c).record;
    c.seed = 6;
    const auto b = run(c).record;
    EXPECT_NE(record_to_json(a, false).dump(), record_to_json(b, false).dump());
}

TEST(Run, RecordContents) {
    const auto dir = fixtures::scratch_dir("run-record");
    const auto ds = fixtures::blobs(100, 3, 4, 6.0, 3);
    fixtures::write_csv(dir / "f.csv", ds);
    const auto c = parse_config("features: f.csv\nextractor: DenseNet201\nseed: 2\nclassifier: GNB\n", dir);
    RunOptions o;
    o.bench_repetitions = 3;
    o.curve_fractions = {0.5, 1.0};
    const auto res = run(c, o);
    const auto& r = res.record;
    EXPECT_TRUE(r.ok);
    EXPECT_GE(r.metrics.accuracy, 0.95);
    EXPECT_EQ(r.per_fold.size(), 10u);
    EXPECT_EQ(r.n_samples, 300u);
    EXPECT_EQ(r.n_features, 4u);
    EXPECT_EQ(r.confusion.total(), 300u);
    EXPECT_EQ(r.roc.size(), 3u);
    EXPECT_EQ(r.curve.size(), 2u);
    ASSERT_TRUE(r.bench.has_value());
    EXPECT_EQ(r.bench->times.size(), 3u);
    EXPECT_EQ(r.features_sha256, io::sha256_file(dir / "f.csv"));
    EXPECT_EQ(r.class_names, data::stroke_class_names());
    EXPECT_EQ(r.label, "DenseNet201+None+GNB");
    EXPECT_EQ(record_from_json(record_to_json(r)).label, r.label);
    EXPECT_EQ(record_to_json(record_from_json(record_to_json(r))).dump(), record_to_json(r).dump());
}

TEST(Run, HoldoutUsesSplitColumn) {
    const auto dir = fixtures::scratch_dir("run-holdout");
    const auto ds = fixtures::blobs(40, 3, 3, 6.0, 4);
    data::SplitAssignment split{std::vector<data::Split>(120, data::Split::Train)};
    for (std::size_t i = 0; i < 120; i += 5) split.split[i] = data::Split::Test;
    data::write_features(dir / "f.csv", ds.X, ds.y, split);
    const auto r = run(parse_config("features: f.csv\nseed: 1\nclassifier: LR\nevaluation: {mode: holdout}\n", dir)).record;
    EXPECT_TRUE(r.split_column_used);
    EXPECT_EQ(r.confusion.total(), 24u);
    EXPECT_TRUE(r.per_fold.empty());
}

TEST(Run, ErrorsNameTheConfiguration) {
    const auto c = parse_config("features: /nonexistent/f.csv\nextractor: E\nseed: 1\nclassifier: DT\n");
    try {
        run(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("E+None+DT"), std::string::npos) << e.what();
    }
}

// ------------------------------------------------------------------ grid

TEST(Grid, RanksEveryCell) {
    const auto dir = fixtures::scratch_dir("grid");
    const auto files = blob_files(dir, 2, 15);
    const auto g = parse_grid(grid_yaml(files, 3));
    const auto result = run_grid(g, 4);
    ASSERT_EQ(result.records.size(), 56u);
    ASSERT_EQ(result.summary.size(), 56u);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < 56; ++i) {
        EXPECT_EQ(result.records[i].index, i);
        EXPECT_TRUE(result.records[i].ok) << result.records[i].label << ": " << result.records[i].error;
    }
    for (std::size_t r = 0; r < 56; ++r) {
        const auto& row = result.summary[r];
        EXPECT_EQ(row.rank, r + 1);
        EXPECT_EQ(row.best, r == 0);
        seen.insert(row.index);
        if (r == 0) continue;
        const auto& prev = result.summary[r - 1].record->metrics;
        const auto& cur = row.record->metrics;
        const bool ordered = prev.accuracy > cur.accuracy ||
                             (prev.accuracy == cur.accuracy &&
                              (prev.f1 > cur.f1 || (prev.f1 == cur.f1 && result.summary[r - 1].index < row.index)));
        EXPECT_TRUE(ordered) << r;
    }
    EXPECT_EQ(seen.size(), 56u);

    // A grid cell evaluates exactly as the same config run on its own.
    const auto cells = g.expand();
    for (std::size_t i : {0u, 13u, 42u}) {
        auto alone = run(cells[i]).record;
        alone.index = i;
        EXPECT_EQ(record_to_json(alone, false).dump(), record_to_json(result.records[i], false).dump());
    }
    // Parallelism does not change results.
    const auto serial = run_grid(g, 1);
    for (std::size_t i = 0; i < 56; ++i) {
        EXPECT_EQ(record_to_json(serial.records[i], false).dump(), record_to_json(result.records[i], false).dump());
    }
}

TEST(Grid, TieBreaks) {
    std::vector<RunRecord> rs(5);
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i].index = i;
    rs[0].metrics.accuracy = 0.9, rs[0].metrics.f1 = 0.8;
    rs[1].metrics.accuracy = 0.9, rs[1].metrics.f1 = 0.85;
    rs[2].ok = false;
    rs[3].metrics.accuracy = 0.9, rs[3].metrics.f1 = 0.85;
    rs[4].metrics.accuracy = 0.95, rs[4].metrics.f1 = 0.1;
    const auto s = rank_records(rs);
    std::vector<std::size_t> order;
    for (const auto& row : s) order.push_back(row.index);
    EXPECT_EQ(order, (std::vector<std::size_t>{4, 1, 3, 0, 2}));
    EXPECT_EQ(s.back().rank, 0u);
    EXPECT_TRUE(s.front().best);
}

TEST(Grid, FailingCellIsIsolated) {
    const auto dir = fixtures::scratch_dir("grid-fail");
    const auto files = blob_files(dir, 1, 10);
    std::ofstream(dir / "broken.csv") << "id,label,f0\na,hemorrhagic,1\nb,ischemic,oops\n";
    const auto g = parse_grid("seed: 1\nevaluation: {k: 3}\ngrid:\n  features: [" + files[0].string() + ", " +
                              (dir / "broken.csv").string() + "]\n  optimizers: [None]\n  classifiers: [GNB, DT]\n");
    const auto result = run_grid(g, 2);
    ASSERT_EQ(result.records.size(), 4u);
    EXPECT_TRUE(result.records[0].ok);
    EXPECT_TRUE(result.records[1].ok);
    for (std::size_t i : {2u, 3u}) {
        EXPECT_FALSE(result.records[i].ok);
        EXPECT_EQ(result.records[i].error_code, "NonNumericValue");
        EXPECT_FALSE(result.records[i].error.empty());
    }
    EXPECT_EQ(result.summary[2].rank, 0u);
    EXPECT_EQ(result.summary[2].index, 2u);
}

// ------------------------------------------------------------------ bundle

TEST(Bundle, RoundTripPredictsIdentically) {
    const auto dir = fixtures::scratch_dir("bundle");
    const auto files = blob_files(dir, 1, 30);
    Rng rng(12);
    const auto probes = fixtures::gaussian_matrix(100, 5, rng);
    for (const char* opt : {"None", "BFO", "PCA", "LDA"}) {
        for (const char* clf : {"SVC", "RF", "GNB", "DT", "XGB", "KNN", "LR"}) {
            std::string y = "features: " + files[0].string() + "\nseed: 3\nevaluation: {k: 3}\nclassifier: " + clf +
                            "\noptimizer:\n  kind: " + opt + "\n";
            if (std::string(opt) == "BFO") y += kSmallBfo;
            const auto res = run(parse_config(y));
            const auto path = dir / (std::string(opt) + clf + ".bundle");
            save_bundle(res.record, *res.model, path);
            const auto b = load_bundle(path);
            EXPECT_EQ(b.model.predict(probes).values, res.model->predict(probes).values) << opt << clf;
            EXPECT_EQ(b.model.predict_scores(probes), res.model->predict_scores(probes)) << opt << clf;
            EXPECT_EQ(record_to_json(b.record).dump(), record_to_json(res.record).dump());
        }
    }
}

TEST(Bundle, TamperingAndVersions) {
    const auto dir = fixtures::scratch_dir("bundle-tamper");
    const auto files = blob_files(dir, 1, 20);
    const auto res = run(parse_config("features: " + files[0].string() + "\nseed: 1\nclassifier: KNN\nevaluation: {k: 3}\n"));
    const std::string bytes = serialize_bundle(res.record, *res.model);
    EXPECT_NO_THROW(parse_bundle(bytes));

    const auto header_end = bytes.find('\n');
    for (std::size_t pos : {header_end + 10, header_end + 500, bytes.size() - 3}) {
        std::string t = bytes;
        t[pos] = t[pos] == '1' ? '2' : '1';
        EXPECT_EQ(code_of([&] { parse_bundle(t); }), ErrorCode::CorruptPayload) << pos;
    }
    EXPECT_EQ(code_of([&] { parse_bundle(bytes.substr(0, bytes.size() - 1)); }), ErrorCode::CorruptPayload);
    EXPECT_EQ(code_of([&] { parse_bundle("garbage"); }), ErrorCode::CorruptPayload);

    std::string future = bytes;
    const auto v = future.find("\"version\":1");
    ASSERT_NE(v, std::string::npos);
    future.replace(v, 11, "\"version\":7");
    try {
        parse_bundle(future);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::VersionMismatch);
        const std::string msg = e.what();
        EXPECT_NE(msg.find('7'), std::string::npos);
        EXPECT_NE(msg.find('1'), std::string::npos);
    }
    EXPECT_EQ(code_of([] { load_bundle("/nonexistent/x.bundle"); }), ErrorCode::Io);
}

// ------------------------------------------------------------------ reports

TEST(Report, CsvTablesAgreeWithRecords) {
    const auto dir = fixtures::scratch_dir("report");
    const auto files = blob_files(dir, 1, 15);
    RunOptions o;
    o.bench_repetitions = 3;
    o.curve_fractions = {0.5, 1.0};
    const auto result = run_grid(parse_grid(grid_yaml(files, 3)), 2, o);
    const auto out = dir / "out";
    fs::create_directories(out);
    const auto written = emit_report(result.records, out, ReportFormat::Csv);
    for (const char* f : {"summary.csv", "per_fold.csv", "roc.csv", "confusion.csv", "learning_curve.csv", "bench.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_EQ(written.size(), 6u);

    const auto summary = read_table(out / "summary.csv");
    ASSERT_EQ(summary.size(), 29u);
    EXPECT_EQ(summary[0][0], "rank");
    EXPECT_EQ(summary[0].size(), 17u);
    for (std::size_t r = 1; r < summary.size(); ++r) {
        const auto& rec = result.records[std::stoul(summary[r][1])];
        EXPECT_EQ(summary[r][2], rec.label);
        EXPECT_NEAR(std::stod(summary[r][8]), 100 * rec.metrics.accuracy, 5e-5);
        EXPECT_NEAR(std::stod(summary[r][11]), 100 * rec.metrics.f1, 5e-5);
        EXPECT_EQ(summary[r][8], percent(rec.metrics.accuracy));
    }
    EXPECT_EQ(summary[1][15], "1");

    const auto roc = read_table(out / "roc.csv");
    std::size_t expected = 1;
    for (const auto& rec : result.records)
        for (const auto& c : rec.roc) expected += c.points.size();
    EXPECT_EQ(roc.size(), expected);

    const auto folds = read_table(out / "per_fold.csv");
    EXPECT_EQ(folds.size(), 1 + 28u * 4);

    emit_report(result.records, out, ReportFormat::Json);
    const auto back = load_records(out / "records.json");
    ASSERT_EQ(back.size(), 28u);
    for (std::size_t i = 0; i < 28; ++i) {
        EXPECT_EQ(record_to_json(back[i]).dump(), record_to_json(result.records[i]).dump());
    }
    const auto svg = emit_report(result.records, out, ReportFormat::Svg);
    EXPECT_EQ(svg.size(), 2u);
    EXPECT_NE(slurp(out / "summary.svg").find("<svg"), std::string::npos);
    EXPECT_EQ(code_of([&] { emit_report({}, out, ReportFormat::Csv); }), ErrorCode::EmptyMatrix);
}

TEST(Report, PercentFormat) {
    EXPECT_EQ(percent(0.98765432), "98.7654");
    EXPECT_EQ(percent(1.0), "100.0000");
    EXPECT_EQ(percent(0.0), "0.0000");
}
