// JSON experiment configuration and the builders that turn it into kernels,
// channels and control plans.
//
// Layout (every section optional at parse time; commands check what they need):
//
//   arrival:    {"constant": 10000} | {"kernel": KERNEL}
//   service:    {"kernel": KERNEL} | {"channel": CHANNEL}
//   copulas:    {"horizon": 50, "dimensions": [{"varpi0": [..], "sequence": [COPULA, ..]}]}
//   simulation: {"horizon", "replications", "seed", "threads", "delay_levels", "backlog_levels"}
//   output:     {"directory": "out"}
//   experiment: {"name", "replications", "horizon", "window", "battery_samples"}
//
//   KERNEL:  {"labels", "transition": [[..]], "increments": [[LAW, ..], ..], "initial_dist"}
//            increments may also be a single row, meaning "by destination state".
//   LAW:     {"type": "constant", "value"} | {"type": "pmf", "support", "probs"} |
//            {"type": "rayleigh", "bandwidth_hz", "snr"} | {"type": "gaussian", "mean", "variance", "points"} |
//            {"type": "negated", "inner": LAW} | {"type": "shifted", "inner": LAW, "offset"}
//   CHANNEL: {"bandwidth_hz", "snr": [[..]], "power_states", "transition": [[..]] | "plan": true, "initial_dist"}
//            SNR entries are linear numbers or strings "db:<value>".
//   COPULA:  {"family": "m"|"w"|"p"} | {"family": "frechet", "weights": [w, p, m]} |
//            {"family": "frechet1", "alpha"} | {"family": "gauss2", "rho"} |
//            {"family": "grid", "values": [[..]], "u_nodes", "v_nodes"}
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "depctl/channel.hpp"
#include "depctl/copula.hpp"
#include "depctl/experiments.hpp"
#include "depctl/spectral.hpp"

namespace depctl {

using Matrix = std::vector<std::vector<double>>;

struct LawConfig {
  std::string type;
  double value = 0.0;
  std::vector<double> support;
  std::vector<double> probs;
  double bandwidth = 0.0;
  double snr = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  int points = 48;
  double offset = 0.0;
  std::vector<LawConfig> inner;  // empty or one element

  bool operator==(const LawConfig&) const = default;
};

struct KernelConfig {
  std::vector<std::string> labels;
  Matrix transition;
  std::vector<std::vector<LawConfig>> increments;  // n x n, or 1 x n by destination
  std::vector<double> initial_dist;                // empty: stationary

  bool operator==(const KernelConfig&) const = default;
};

struct ArrivalConfig {
  std::optional<double> constant;
  std::optional<KernelConfig> kernel;

  bool operator==(const ArrivalConfig&) const = default;
};

struct ChannelConfig {
  double bandwidth_hz = 0.0;
  Matrix snr;  // linear
  std::vector<std::string> power_states;
  Matrix transition;  // empty when driven by the copula plan
  bool plan = false;
  std::vector<double> initial_dist;

  bool operator==(const ChannelConfig&) const = default;
};

struct ServiceConfig {
  std::optional<KernelConfig> kernel;
  std::optional<ChannelConfig> channel;

  bool operator==(const ServiceConfig&) const = default;
};

struct CopulaConfig {
  std::string family;
  double alpha = 0.0;
  double rho = 0.0;
  std::vector<double> weights;
  std::vector<double> u_nodes;
  std::vector<double> v_nodes;
  Matrix values;

  bool operator==(const CopulaConfig&) const = default;
};

struct CopulaDimensionConfig {
  std::vector<double> varpi0;
  std::vector<CopulaConfig> sequence;

  bool operator==(const CopulaDimensionConfig&) const = default;
};

struct CopulasConfig {
  int horizon = 1;
  std::vector<CopulaDimensionConfig> dimensions;

  bool operator==(const CopulasConfig&) const = default;
};

struct SimulationConfig {
  long horizon = 1000;
  long replications = 10000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::vector<double> delay_levels;
  std::vector<double> backlog_levels;

  bool operator==(const SimulationConfig&) const = default;
};

struct OutputConfig {
  std::string directory;

  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfigEntry {
  std::string name;
  long replications = 20000;
  long horizon = 200;
  int window = 4;
  long battery_samples = 20000;

  bool operator==(const ExperimentConfigEntry&) const = default;
};

struct ExperimentConfig {
  std::optional<ArrivalConfig> arrival;
  std::optional<ServiceConfig> service;
  std::optional<CopulasConfig> copulas;
  std::optional<SimulationConfig> simulation;
  std::optional<OutputConfig> output;
  std::optional<ExperimentConfigEntry> experiment;

  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError on malformed JSON or schema violations.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
// Canonical JSON (two-space indent); parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

IncrementLaw build_law(const LawConfig& law);
MapKernel build_kernel(const KernelConfig& kernel);
CopulaSpec build_copula(const CopulaConfig& copula);
ChannelSpec build_channel(const ChannelConfig& channel);

// Requires config.copulas.
ControlPlan build_plan(const ExperimentConfig& config);
MapKernel build_arrival(const ExperimentConfig& config);
// A plan-driven channel uses the first step of plan dimension 0.
MapKernel build_service(const ExperimentConfig& config);

}  // namespace depctl
