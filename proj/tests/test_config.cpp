#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "depctl/config.hpp"
#include "depctl/error.hpp"

using namespace depctl;

namespace {

std::string config_path(const std::string& name) { return std::string(DEPCTL_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(Config, ShippedConfigsRoundTrip) {
  for (const auto& entry : std::filesystem::directory_iterator(DEPCTL_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const ExperimentConfig c = load_config(entry.path().string());
    const std::string text = serialize_config(c);
    EXPECT_EQ(parse_config(text), c) << entry.path();
    EXPECT_EQ(serialize_config(parse_config(text)), text) << entry.path();
  }
}

TEST(Config, DecibelSnr) {
  const auto c = parse_config(R"({"service": {"channel": {"bandwidth_hz": 1000, "snr": [["db:10", 2]],
                                   "transition": [[1]]}}})");
  ASSERT_TRUE(c.service && c.service->channel);
  EXPECT_NEAR(c.service->channel->snr[0][0], 10.0, 1e-12);
  EXPECT_EQ(c.service->channel->snr[0][1], 2.0);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"simulation": {"horizon": "long"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"service": {"channel": {"snr": [["loud"]]}}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/depctl.json"), ConfigError);
  EXPECT_THROW(build_law(LawConfig{.type = "cauchy"}), ConfigError);
  EXPECT_THROW(build_copula(CopulaConfig{.family = "clayton"}), ConfigError);
  EXPECT_THROW(build_plan(ExperimentConfig{}), ConfigError);
  EXPECT_THROW(build_arrival(ExperimentConfig{}), ConfigError);
  EXPECT_THROW(build_service(ExperimentConfig{}), ConfigError);
}

TEST(Config, LawBuilders) {
  LawConfig pmf{.type = "pmf", .support = {0, 2}, .probs = {0.5, 0.5}};
  EXPECT_NEAR(build_law(pmf).mean(), 1.0, 1e-15);
  LawConfig neg{.type = "negated"};
  neg.inner = {pmf};
  EXPECT_NEAR(build_law(neg).mean(), -1.0, 1e-15);
  LawConfig sh{.type = "shifted", .offset = 3.0};
  sh.inner = {pmf};
  EXPECT_NEAR(build_law(sh).mean(), 4.0, 1e-15);
  EXPECT_NEAR(build_law(LawConfig{.type = "gaussian", .mean = 3, .variance = 2}).mgf(1.0), std::exp(4.0), 1e-9);
}

TEST(Config, ToyBuilds) {
  const auto c = load_config(config_path("toy.json"));
  const MapKernel a = build_arrival(c);
  const MapKernel s = build_service(c);
  EXPECT_EQ(a.size(), 1);
  EXPECT_NEAR(mean_rate(a), 1.0, 1e-15);
  EXPECT_NEAR(mean_rate(s), 3.0, 1e-12);
  EXPECT_NEAR(stability_root(a, s).theta_star, 2.0, 1e-9);
}

TEST(Config, KernelIncrementsByDestination) {
  const auto c = parse_config(R"({"arrival": {"kernel": {"transition": [[0.9, 0.1], [0.2, 0.8]],
      "increments": [{"type": "constant", "value": 0}, {"type": "constant", "value": 4}]}}})");
  const MapKernel k = build_arrival(c);
  EXPECT_EQ(k.size(), 2);
  EXPECT_EQ(k.increment(0, 1), IncrementLaw::constant(4.0));
  EXPECT_EQ(k.increment(1, 1), IncrementLaw::constant(4.0));
  EXPECT_EQ(k.increment(1, 0), IncrementLaw::constant(0.0));
  // Empty initial distribution means stationary: (2/3, 1/3).
  EXPECT_NEAR(k.initial_dist()(0), 2.0 / 3.0, 1e-12);
}

TEST(Config, PlanDrivenChannel) {
  const auto c = load_config(config_path("rayleigh_negative.json"));
  const ControlPlan plan = build_plan(c);
  ASSERT_FALSE(plan.per_dimension.empty());
  const MapKernel s = build_service(c);
  EXPECT_TRUE(s.transition().isApprox(plan.per_dimension[0].transitions[0], 1e-15));
  EXPECT_NEAR(s.initial_dist()(0), 0.3, 1e-12);
  EXPECT_NEAR(s.transition()(0, 0), 0.2875, 5e-4);
}
