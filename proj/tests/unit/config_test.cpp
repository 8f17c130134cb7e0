#include <string>

#include <gtest/gtest.h>

#include "fdloss/config.hpp"
#include "fdloss/error.hpp"

namespace fdloss {
namespace {

const char* kMinimal = R"(
[trainer]
batch_size = 8
total_steps = 10
warmup_steps = 1
peak_lr = 1e-3

[generator]
z_dim = 2
hidden = 4
out_dim = 2

[ensemble]
rep.0.kind = identity

[target]
component.0.mean = 0, 0
)";

std::string config_error(const std::string& text) {
  try {
    train_config_from(parse_config(text));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return "";
}

TEST(Config, BundledMixtureConfig) {
  const TrainConfig c = load_train_config(FDLOSS_CONFIG_DIR "/mixture.cfg");
  EXPECT_EQ(c.batch_size, 128u);
  EXPECT_EQ(c.total_steps, 6000u);
  EXPECT_EQ(c.warmup_steps, 300u);
  EXPECT_EQ(c.peak_lr, 3e-4);
  EXPECT_EQ(c.estimator.kind, EstimatorKind::kEma);
  EXPECT_EQ(c.estimator.beta, 0.999);
  EXPECT_EQ(c.layer_dims(), (std::vector<std::size_t>{8, 64, 64, 2}));
  ASSERT_EQ(c.ensemble.size(), 2u);
  EXPECT_EQ(c.ensemble.specs[1].kind, RepresentationKind::kTanhRandomFeatures);
  EXPECT_EQ(c.ensemble.specs[1].in_dim, 2u);
  EXPECT_EQ(c.ensemble.specs[1].out_dim, 16u);
  EXPECT_EQ(c.ensemble.specs[0].out_dim, 2u);
  EXPECT_TRUE(c.ensemble.weights.empty());
  ASSERT_EQ(c.target.components.size(), 2u);
  EXPECT_EQ(c.target.components[0].cov, (Matrix{{0.25, 0.0}, {0.0, 0.25}}));
  EXPECT_EQ(c.target.components[1].cov, (Matrix{{0.5, 0.1}, {0.1, 0.3}}));
  EXPECT_EQ(c.target.seed, 2024u);
  EXPECT_EQ(c.source.components[0].mean, (Vector{0.0, -3.0}));
  EXPECT_EQ(c.pretrain_steps, 1500u);
  EXPECT_EQ(c.pretrain_batch_size, 256u);
}

TEST(Config, Defaults) {
  const TrainConfig c = train_config_from(parse_config(kMinimal));
  const TrainConfig d;
  EXPECT_EQ(c.optimizer.beta1, 0.9);
  EXPECT_EQ(c.optimizer.beta2, 0.95);
  EXPECT_EQ(c.optimizer.eps, 1e-8);
  EXPECT_EQ(c.estimator.beta, d.estimator.beta);
  EXPECT_EQ(c.ensemble.c, 0.01);
  EXPECT_EQ(c.target.components[0].cov, Matrix::identity(2));
  EXPECT_EQ(c.target.components[0].weight, 1.0);
  EXPECT_EQ(c.pretrain_steps, 0u);
  EXPECT_FALSE(c.source.is_mixture());
}

TEST(Config, QueueAndWeights) {
  std::string text = kMinimal;
  text += "[estimator]\nkind = queue\ncapacity = 32\n";
  text.replace(text.find("rep.0.kind = identity"), 21,
               "rep.0.kind = identity\nrep.0.weight = 2\nrep.1.kind = quadratic\n");
  const TrainConfig c = train_config_from(parse_config(text));
  EXPECT_EQ(c.estimator.kind, EstimatorKind::kQueue);
  EXPECT_EQ(c.estimator.capacity, 32u);
  EXPECT_EQ(c.ensemble.specs[1].out_dim, 5u);
  EXPECT_EQ(c.ensemble.weights, (std::vector<double>{2.0, 1.0}));
}

TEST(Config, CommentsAndWhitespace) {
  const ConfigFile f = parse_config("  # leading\n[trainer]   # trailing\n  seed=  42  # c\n");
  EXPECT_EQ(f.entries.at("trainer.seed"), "42");
  EXPECT_EQ(f.lines.at("trainer.seed"), 3u);
}

TEST(Config, UnknownKeyNamesLine) {
  const std::string msg = config_error(std::string(kMinimal) + "[pretrain]\nstepz = 4\n");
  EXPECT_NE(msg.find("pretrain.stepz"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 19"), std::string::npos) << msg;
}

TEST(Config, ParseErrors) {
  auto parse_error = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
      return std::string(e.what());
    }
    ADD_FAILURE() << "parsed: " << text;
    return std::string();
  };
  EXPECT_NE(parse_error("seed = 1\n").find("outside a section"), std::string::npos);
  EXPECT_NE(parse_error("[trainer]\nseed = 1\nseed = 2\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error("[trainers]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(parse_error("[trainer]\nseed 1\n").find("key = value"), std::string::npos);
  EXPECT_NE(parse_error("[trainer\n").find("unterminated"), std::string::npos);
}

TEST(Config, ValueErrors) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string text = kMinimal;
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  EXPECT_NE(config_error(with("peak_lr = 1e-3", "peak_lr = fast")).find("peak_lr"),
            std::string::npos);
  EXPECT_NE(config_error(with("peak_lr = 1e-3", "peak_lr = inf")).find("finite"),
            std::string::npos);
  EXPECT_NE(config_error(with("batch_size = 8", "batch_size = -8")).find("batch_size"),
            std::string::npos);
  config_error(with("rep.0.kind = identity", "rep.0.kind = inception"));
  config_error(with("rep.0.kind = identity", "rep.0.kind = identity\nrep.2.kind = identity"));
  config_error(with("component.0.mean = 0, 0", "component.0.mean = 0, 0\ncomponent.0.cov = 1, 2, 3"));
  config_error(std::string(kMinimal) + "[estimator]\nkind = median\n");
  EXPECT_NE(config_error(with("warmup_steps = 1", "warmup_steps = 11")).find("invalid configuration"),
            std::string::npos);
}

TEST(Config, MissingFile) {
  try {
    load_train_config("/nonexistent/fdloss.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFileNotFound);
  }
}

}  // namespace
}  // namespace fdloss
