#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "fang/pipeline.hpp"
#include "fang/synth.hpp"
#include "fixtures.hpp"

namespace fang {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr
};

Result run(const std::string& args) {
  const std::string cmd = std::string("\"") + FANG_CLI + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(test::read_file(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::map<std::string, std::string> read_metrics(const fs::path& p) {
  std::map<std::string, std::string> m;
  for (const auto& row : read_csv(p))
    if (row.size() == 2) m[row[0]] = row[1];
  return m;
}

const char* kSmallModel = "dim = 8\ntemporal_hidden = 4\nstance_dim = 4\nsage_hidden = 8\nbatch_size = 32\nepochs = 2\n";

// One dataset and one trained model shared by the suite.
class Cli : public ::testing::Test {
 protected:
  static fs::path root, data, model, config;

  static void SetUpTestSuite() {
    root = test::temp_dir("cli");
    data = root / "data";
    model = root / "model";
    config = root / "small.cfg";
    test::write_file(config, kSmallModel);
    const Result s = run("synth --out " + data.string() + " --articles 300 --sources 20 --users 600 --seed 4");
    ASSERT_EQ(s.code, 0) << s.output;
    const Result t = run("train --data " + data.string() + " --config " + config.string() + " --out " + model.string());
    ASSERT_EQ(t.code, 0) << t.output;
  }
};
fs::path Cli::root, Cli::data, Cli::model, Cli::config;

TEST_F(Cli, IngestCheckSummarizes) {
  const Result r = run("ingest-check --data " + data.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("articles 300"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("sources 20"), std::string::npos);
  EXPECT_NE(r.output.find("users 600"), std::string::npos);
  EXPECT_NE(r.output.find("articles without source 0"), std::string::npos);
}

TEST_F(Cli, TrainWritesLayout) {
  for (const char* f : {"checkpoint", "train_log.csv", "config_resolved"}) EXPECT_TRUE(fs::exists(model / f)) << f;
  const auto log = read_csv(model / "train_log.csv");
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0], (std::vector<std::string>{"epoch", "l_prox", "l_stance", "l_news", "l_total", "val_auc"}));
  const KeyValues resolved = read_key_values(model / "config_resolved");
  EXPECT_EQ(resolved.at("dim"), "8");
  EXPECT_EQ(resolved.at("epochs"), "2");
  const Checkpoint ck = load_checkpoint(model / "checkpoint");
  EXPECT_EQ(ck.config, resolved);
}

TEST_F(Cli, EvalMatchesFinalTrainingAuc) {
  const fs::path out = root / "eval";
  const Result r = run("eval --data " + data.string() + " --checkpoint " + (model / "checkpoint").string() + " --out " +
                    out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto m = read_metrics(out / "metrics.csv");
  const auto log = read_csv(model / "train_log.csv");
  EXPECT_EQ(m.at("test_auc"), log.back().back());
  EXPECT_EQ(m.at("test_articles"), "60");
  // Both source representations are probed.
  const double full = std::stod(m.at("probe_auc_full")), base = std::stod(m.at("probe_auc_baseline"));
  EXPECT_TRUE(full >= 0 && full <= 1 && base >= 0 && base <= 1);
  const auto prof = read_csv(out / "attention_profile.csv");
  ASSERT_GT(prof.size(), 2u);
  double fake_mass = 0;
  for (std::size_t i = 1; i < prof.size(); ++i)
    if (prof[i][0] == "fake") fake_mass += std::stod(prof[i][3]);
  EXPECT_NEAR(fake_mass, 1.0, 1e-9);
}

TEST_F(Cli, AttentionAndExport) {
  const fs::path out = root / "reps";
  const std::string common =
      " --data " + data.string() + " --checkpoint " + (model / "checkpoint").string() + " --out " + out.string();
  const Result a = run("attention" + common);
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_TRUE(fs::exists(out / "attention_profile.csv"));
  const Result e = run("export-reps" + common);
  ASSERT_EQ(e.code, 0) << e.output;
  const auto full = read_csv(out / "source_reps.csv");
  const auto base = read_csv(out / "source_reps_baseline.csv");
  ASSERT_EQ(full.size(), 21u);
  ASSERT_EQ(base.size(), 21u);
  // key, z_s (d = 8), x_s, and for the full form the summed article features
  const std::size_t input_dim = base[0].size() - 1 - 8;
  EXPECT_GT(input_dim, 0u);
  EXPECT_EQ(full[0].size(), 1 + 8 + 2 * input_dim);
}

TEST_F(Cli, RerunIsByteIdentical) {
  const fs::path again = root / "model_again";
  const Result t = run("train --data " + data.string() + " --config " + config.string() + " --out " + again.string());
  ASSERT_EQ(t.code, 0) << t.output;
  for (const char* f : {"checkpoint", "train_log.csv", "config_resolved"})
    EXPECT_EQ(test::read_file(model / f), test::read_file(again / f)) << f;
}

TEST_F(Cli, NoStanceLossLogsZeroStanceColumn) {
  const fs::path out = root / "nostance";
  const Result t = run("train --no-stance-loss --epochs 1 --data " + data.string() + " --config " + config.string() +
                    " --out " + out.string());
  ASSERT_EQ(t.code, 0) << t.output;
  const auto log = read_csv(out / "train_log.csv");
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(std::stod(log[1][2]), 0.0);
  EXPECT_GT(std::stod(log[1][1]), 0.0);
}

TEST_F(Cli, TrainFractionReported) {
  const fs::path out = root / "frac";
  const Result t = run("train --train-frac 0.1 --epochs 1 --data " + data.string() + " --config " + config.string() +
                    " --out " + out.string());
  ASSERT_EQ(t.code, 0) << t.output;
  std::size_t pool = 0, train = 0, test_n = 0;
  const auto at = t.output.find("labeled pool");
  ASSERT_NE(at, std::string::npos) << t.output;
  ASSERT_EQ(std::sscanf(t.output.c_str() + at, "labeled pool %zu, train %zu (train_frac %*[^)]), test %zu", &pool,
                        &train, &test_n),
            3)
      << t.output;
  EXPECT_EQ(pool + test_n, 300u);
  EXPECT_LE(std::abs(static_cast<double>(train) - 0.1 * static_cast<double>(pool)), 1.0);
}

TEST_F(Cli, RandomCheckpointIsNearChance) {
  const fs::path dir = root / "random";
  fs::create_directories(dir);
  TrainConfig cfg;
  KeyValues small = read_key_values(config);
  apply_key_values(cfg, small);
  const Dataset ds = load_dataset({synth_paths(data).entities, synth_paths(data).edges, synth_paths(data).embeddings},
                                  cfg.max_vocab);
  save_checkpoint(dir / "checkpoint", init_params(ModelDims::from_config(cfg, ds.space.dim()), 11), to_key_values(cfg));
  const Result r = run("eval --data " + data.string() + " --checkpoint " + (dir / "checkpoint").string() + " --out " +
                    dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NEAR(std::stod(read_metrics(dir / "metrics.csv").at("test_auc")), 0.5, 0.1);
}

TEST_F(Cli, CheckpointDimensionMismatch) {
  const Result r = run("eval --data " + data.string() + " --checkpoint " + (model / "checkpoint").string() +
                    " --set dim=16 --set temporal_hidden=8 --out " + (root / "mismatch").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("error[dimension-mismatch]"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(root / "mismatch"));
}

TEST(CliErrors, InvalidConfigWritesNothing) {
  const fs::path root = test::temp_dir("cli_err");
  const Result unknown = run("synth --out " + (root / "a").string() + " --set mystery=1");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.output.find("unknown config key: mystery"), std::string::npos) << unknown.output;
  EXPECT_FALSE(fs::exists(root / "a"));

  const Result zero = run("synth --out " + (root / "b").string() + " --articles 0");
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.output.find("error[config]"), std::string::npos) << zero.output;
  EXPECT_FALSE(fs::exists(root / "b"));

  const Result data = run("synth --out " + (root / "d").string() + " --articles 40 --sources 4 --users 50");
  ASSERT_EQ(data.code, 0) << data.output;
  for (const std::string& bad : {std::string("--set dim=10"), std::string("--train-frac 0"),
                                 std::string("--set learning_rate=fast"), std::string("--set bogus=1")}) {
    const Result t = run("train --data " + (root / "d").string() + " --out " + (root / "t").string() + " " + bad);
    EXPECT_EQ(t.code, 2) << bad << "\n" << t.output;
    EXPECT_FALSE(fs::exists(root / "t")) << bad;
  }
  const Result missing = run("train --data " + (root / "nowhere").string() + " --out " + (root / "t").string());
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.output.find("error[io]"), std::string::npos) << missing.output;
  const Result eval_opt = run("eval --data " + (root / "d").string() + " --checkpoint x --set min_pts=5abc --out " +
                           (root / "t").string());
  EXPECT_EQ(eval_opt.code, 2);
  EXPECT_FALSE(fs::exists(root / "t"));
}

}  // namespace
}  // namespace fang
