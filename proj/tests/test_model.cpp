#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

namespace fang {
namespace {

ModelDims dims() {
  ModelDims d;
  d.input_dim = 7;
  d.dim = 6;
  d.temporal_hidden = 3;
  d.stance_dim = 2;
  d.sage_hidden = 5;
  d.depth = 2;
  return d;
}

std::vector<double> flatten(const ModelParams<double>& p) {
  std::vector<double> v;
  p.visit([&](const std::string&, const auto& t) {
    for (Index j = 0; j < t.cols(); ++j)
      for (Index i = 0; i < t.rows(); ++i) v.push_back(t(i, j));
  });
  return v;
}

TEST(InitParams, ShapesFollowDimensions) {
  const ModelParams<double> p = init_params(dims(), 1);
  ASSERT_EQ(p.sage.depth(), 2);
  EXPECT_EQ(p.sage.weights[0].rows(), 5);
  EXPECT_EQ(p.sage.weights[0].cols(), 14);
  EXPECT_EQ(p.sage.weights[1].rows(), 6);
  EXPECT_EQ(p.sage.weights[1].cols(), 10);
  EXPECT_EQ(p.lstm.forward.input_weights.rows(), 12);
  EXPECT_EQ(p.lstm.forward.input_weights.cols(), 6 + kMetaDim);
  EXPECT_EQ(p.lstm.backward.recurrent_weights.cols(), 3);
  EXPECT_EQ(p.attn.engagement_projection.rows(), 6);
  EXPECT_EQ(p.attn.engagement_projection.cols(), 3);
  EXPECT_EQ(p.attn.meta_projection.size(), kMetaDim);
  EXPECT_EQ(p.stance.user[2].rows(), 2);
  EXPECT_EQ(p.stance.article[3].cols(), 6);
  EXPECT_EQ(p.clf.weights.size(), 12);
  EXPECT_EQ(p.clf.bias[0], 0.0);
  const ModelDims back = dims_of(p);
  EXPECT_EQ(back.input_dim, 7);
  EXPECT_EQ(back.dim, 6);
  EXPECT_EQ(back.sage_hidden, 5);
}

TEST(InitParams, ForgetBiasAndRecurrentBounds) {
  const ModelParams<double> p = init_params(dims(), 2);
  const double bound = 1.0 / std::sqrt(3.0);
  for (const auto* l : {&p.lstm.forward, &p.lstm.backward}) {
    EXPECT_EQ(l->bias.segment(3, 3), Eigen::VectorXd::Ones(3));
    EXPECT_LE(l->recurrent_weights.cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(l->input_weights.cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(l->bias.head(3).cwiseAbs().maxCoeff(), bound);
  }
  EXPECT_LE(p.attn.engagement_projection.cwiseAbs().maxCoeff(), bound);
}

TEST(InitParams, SeededAndDistinct) {
  EXPECT_EQ(flatten(init_params(dims(), 4)), flatten(init_params(dims(), 4)));
  EXPECT_NE(flatten(init_params(dims(), 4)), flatten(init_params(dims(), 5)));
  EXPECT_EQ(parameter_count(init_params(dims(), 4)), static_cast<Index>(flatten(init_params(dims(), 4)).size()));
}

TEST(Checkpoint, BitExactRoundTrip) {
  const auto dir = test::temp_dir("ckpt");
  ModelParams<double> p = init_params(dims(), 9);
  p.clf.bias[0] = 0.1;
  p.attn.meta_projection[0] = 1.0 / 3.0;
  p.attn.meta_projection[1] = -4.9e-324;
  p.attn.meta_projection[2] = 1.7976931348623157e308;
  p.sage.normalize_output = false;
  KeyValues cfg = to_key_values(test::small_config());
  save_checkpoint(dir / "m.json", p, cfg);
  const Checkpoint ck = load_checkpoint(dir / "m.json");
  EXPECT_EQ(flatten(ck.params), flatten(p));
  EXPECT_FALSE(ck.params.sage.normalize_output);
  EXPECT_EQ(ck.config, cfg);
  // Re-saving the loaded checkpoint reproduces the file byte for byte.
  save_checkpoint(dir / "again.json", ck.params, ck.config);
  EXPECT_EQ(test::read_file(dir / "m.json"), test::read_file(dir / "again.json"));
}

TEST(Checkpoint, MalformedInputs) {
  const auto dir = test::temp_dir("ckpt_bad");
  const auto expect = [&](const std::string& name, const std::string& body, ErrorCategory cat) {
    test::write_file(dir / name, body);
    try {
      load_checkpoint(dir / name);
      ADD_FAILURE() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), cat) << name;
    }
  };
  expect("a.json", "{not json", ErrorCategory::MalformedLine);
  expect("b.json", R"({"format":"other"})", ErrorCategory::MalformedLine);
  expect("c.json", R"({"format":"fang-checkpoint","config":{},"normalize_output":true,"tensors":{}})",
         ErrorCategory::MalformedLine);

  save_checkpoint(dir / "good.json", init_params(dims(), 1), {});
  std::string text = test::read_file(dir / "good.json");
  const auto at = text.find("\"clf.b\"");
  ASSERT_NE(at, std::string::npos);
  std::string renamed = text;
  renamed.replace(at, 7, "\"clf.x\"");
  expect("d.json", renamed, ErrorCategory::MalformedLine);
  std::string reshaped = text;
  const auto shape = reshaped.find("[1,1]", at);
  ASSERT_NE(shape, std::string::npos);
  reshaped.replace(shape, 5, "[1,2]");
  expect("e.json", reshaped, ErrorCategory::MalformedLine);
  try {
    load_checkpoint(dir / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Io);
  }
}

TEST(CastParams, FloatRoundTripWithinPrecision) {
  const ModelParams<double> p = init_params(dims(), 3);
  const ModelParams<double> back = cast_params<double>(cast_params<float>(p));
  const auto a = flatten(p), b = flatten(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-7);
}

TEST(Config, KeyValueRoundTrip) {
  TrainConfig c;
  c.fanouts = {7, 3, 2};
  c.q = 2.5;
  c.learning_rate = 3e-4;
  c.disable_time = true;
  c.seed = 12345678901ULL;
  c.train_frac = 0.3;
  KeyValues kv = to_key_values(c);
  TrainConfig back;
  apply_key_values(back, kv);
  EXPECT_TRUE(kv.empty());
  EXPECT_EQ(to_key_values(back), to_key_values(c));
  EXPECT_EQ(back.fanouts, c.fanouts);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.learning_rate, c.learning_rate);
}

TEST(Config, FileParsingAndErrors) {
  const auto dir = test::temp_dir("cfg");
  test::write_file(dir / "c.cfg", "# comment\n dim = 32 \n\ntemporal_hidden=16  # trailing\nmystery = 1\n");
  KeyValues kv = read_key_values(dir / "c.cfg");
  TrainConfig c;
  apply_key_values(c, kv);
  EXPECT_EQ(c.dim, 32);
  EXPECT_EQ(c.temporal_hidden, 16);
  EXPECT_EQ(kv, (KeyValues{{"mystery", "1"}}));
  c.validate();

  test::write_file(dir / "bad.cfg", "dim 32\n");
  try {
    read_key_values(dir / "bad.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Config);
    EXPECT_EQ(e.line(), 1u);
  }
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"dim", "abc"}, {"q", "1.5x"}, {"disable_time", "maybe"}, {"fanouts", "3,,2"}}) {
    KeyValues one{{k, v}};
    TrainConfig t;
    try {
      apply_key_values(t, one);
      ADD_FAILURE() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::Config) << k;
    }
  }
  TrainConfig bad;
  bad.train_frac = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = TrainConfig{};
  bad.dim = 10;
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace fang
