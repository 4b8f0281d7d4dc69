#include "depctl/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "depctl/error.hpp"

namespace depctl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

template <class T>
T integer(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(where, "expected an integer");
  return j.get<T>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> vec(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix mat(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  Matrix out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> strings(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(text(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Linear number or "db:<value>".
double snr_value(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.rfind("db:", 0) == 0) {
      try {
        std::size_t used = 0;
        const double db = std::stod(s.substr(3), &used);
        if (used == s.size() - 3) return std::pow(10.0, db / 10.0);
      } catch (const std::exception&) {
      }
    }
  }
  fail(where, "expected a linear SNR or a \"db:<value>\" string");
}

LawConfig parse_law(const json& j, const std::string& where) {
  LawConfig law;
  law.type = text(require(j, "type", where), where + ".type");
  if (law.type == "constant") {
    law.value = number(require(j, "value", where), where + ".value");
  } else if (law.type == "pmf") {
    law.support = vec(require(j, "support", where), where + ".support");
    law.probs = vec(require(j, "probs", where), where + ".probs");
  } else if (law.type == "rayleigh") {
    law.bandwidth = number(require(j, "bandwidth_hz", where), where + ".bandwidth_hz");
    law.snr = snr_value(require(j, "snr", where), where + ".snr");
  } else if (law.type == "gaussian") {
    law.mean = number(require(j, "mean", where), where + ".mean");
    law.variance = number(require(j, "variance", where), where + ".variance");
    if (j.contains("points")) law.points = integer<int>(j.at("points"), where + ".points");
  } else if (law.type == "negated" || law.type == "shifted") {
    law.inner.push_back(parse_law(require(j, "inner", where), where + ".inner"));
    if (law.type == "shifted") law.offset = number(require(j, "offset", where), where + ".offset");
  } else {
    fail(where, "unknown law type '" + law.type + "'");
  }
  return law;
}

json law_json(const LawConfig& law) {
  json j{{"type", law.type}};
  if (law.type == "constant") {
    j["value"] = law.value;
  } else if (law.type == "pmf") {
    j["support"] = law.support;
    j["probs"] = law.probs;
  } else if (law.type == "rayleigh") {
    j["bandwidth_hz"] = law.bandwidth;
    j["snr"] = law.snr;
  } else if (law.type == "gaussian") {
    j["mean"] = law.mean;
    j["variance"] = law.variance;
    j["points"] = law.points;
  } else {
    j["inner"] = law_json(law.inner.front());
    if (law.type == "shifted") j["offset"] = law.offset;
  }
  return j;
}

KernelConfig parse_kernel(const json& j, const std::string& where) {
  KernelConfig k;
  k.transition = mat(require(j, "transition", where), where + ".transition");
  const std::size_t n = k.transition.size();
  if (j.contains("labels")) {
    k.labels = strings(j.at("labels"), where + ".labels");
  } else {
    for (std::size_t i = 0; i < n; ++i) k.labels.push_back("s" + std::to_string(i));
  }
  const json& inc = require(j, "increments", where);
  if (!inc.is_array() || inc.empty()) fail(where + ".increments", "expected a non-empty array");
  // A flat array of laws is shorthand for one row indexed by destination.
  const bool flat = inc.front().is_object();
  if (flat) {
    std::vector<LawConfig> row;
    for (std::size_t c = 0; c < inc.size(); ++c) row.push_back(parse_law(inc[c], where + ".increments[" + std::to_string(c) + "]"));
    k.increments.push_back(std::move(row));
  } else {
    for (std::size_t r = 0; r < inc.size(); ++r) {
      if (!inc[r].is_array()) fail(where + ".increments", "rows must be arrays");
      std::vector<LawConfig> row;
      for (std::size_t c = 0; c < inc[r].size(); ++c) {
        row.push_back(parse_law(inc[r][c], where + ".increments[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
      }
      k.increments.push_back(std::move(row));
    }
  }
  if (j.contains("initial_dist")) k.initial_dist = vec(j.at("initial_dist"), where + ".initial_dist");
  return k;
}

json kernel_json(const KernelConfig& k) {
  json inc = json::array();
  for (const auto& row : k.increments) {
    json r = json::array();
    for (const auto& law : row) r.push_back(law_json(law));
    inc.push_back(r);
  }
  json j{{"labels", k.labels}, {"transition", k.transition}, {"increments", inc}};
  if (!k.initial_dist.empty()) j["initial_dist"] = k.initial_dist;
  return j;
}

ChannelConfig parse_channel(const json& j, const std::string& where) {
  ChannelConfig c;
  c.bandwidth_hz = number(require(j, "bandwidth_hz", where), where + ".bandwidth_hz");
  const json& snr = require(j, "snr", where);
  if (!snr.is_array()) fail(where + ".snr", "expected an array of rows");
  for (std::size_t r = 0; r < snr.size(); ++r) {
    if (!snr[r].is_array()) fail(where + ".snr", "rows must be arrays");
    std::vector<double> row;
    for (std::size_t s = 0; s < snr[r].size(); ++s) {
      row.push_back(snr_value(snr[r][s], where + ".snr[" + std::to_string(r) + "][" + std::to_string(s) + "]"));
    }
    c.snr.push_back(std::move(row));
  }
  if (j.contains("power_states")) {
    c.power_states = strings(j.at("power_states"), where + ".power_states");
  } else {
    for (std::size_t i = 0; i < c.snr.size(); ++i) c.power_states.push_back("p" + std::to_string(i));
  }
  if (j.contains("plan")) {
    if (!j.at("plan").is_boolean()) fail(where + ".plan", "expected a boolean");
    c.plan = j.at("plan").get<bool>();
  }
  if (j.contains("transition")) c.transition = mat(j.at("transition"), where + ".transition");
  if (c.plan == !c.transition.empty()) fail(where, "give exactly one of 'transition' and 'plan': true");
  if (j.contains("initial_dist")) c.initial_dist = vec(j.at("initial_dist"), where + ".initial_dist");
  return c;
}

json channel_json(const ChannelConfig& c) {
  json j{{"bandwidth_hz", c.bandwidth_hz}, {"snr", c.snr}, {"power_states", c.power_states}};
  if (c.plan) {
    j["plan"] = true;
  } else {
    j["transition"] = c.transition;
  }
  if (!c.initial_dist.empty()) j["initial_dist"] = c.initial_dist;
  return j;
}

CopulaConfig parse_copula(const json& j, const std::string& where) {
  CopulaConfig c;
  c.family = text(require(j, "family", where), where + ".family");
  if (c.family == "m" || c.family == "w" || c.family == "p") {
  } else if (c.family == "frechet") {
    c.weights = vec(require(j, "weights", where), where + ".weights");
    if (c.weights.size() != 3) fail(where + ".weights", "expected [w, p, m]");
  } else if (c.family == "frechet1") {
    c.alpha = number(require(j, "alpha", where), where + ".alpha");
  } else if (c.family == "gauss2") {
    c.rho = number(require(j, "rho", where), where + ".rho");
  } else if (c.family == "grid") {
    c.values = mat(require(j, "values", where), where + ".values");
    if (j.contains("u_nodes")) c.u_nodes = vec(j.at("u_nodes"), where + ".u_nodes");
    if (j.contains("v_nodes")) c.v_nodes = vec(j.at("v_nodes"), where + ".v_nodes");
    if (c.u_nodes.empty() != c.v_nodes.empty()) fail(where, "give both or neither of u_nodes and v_nodes");
  } else {
    fail(where, "unknown copula family '" + c.family + "'");
  }
  return c;
}

json copula_json(const CopulaConfig& c) {
  json j{{"family", c.family}};
  if (c.family == "frechet") j["weights"] = c.weights;
  if (c.family == "frechet1") j["alpha"] = c.alpha;
  if (c.family == "gauss2") j["rho"] = c.rho;
  if (c.family == "grid") {
    j["values"] = c.values;
    if (!c.u_nodes.empty()) {
      j["u_nodes"] = c.u_nodes;
      j["v_nodes"] = c.v_nodes;
    }
  }
  return j;
}

Eigen::MatrixXd to_eigen(const Matrix& m, const std::string& what) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(m.front().size());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(m[static_cast<std::size_t>(r)].size()) != cols) {
      throw DimensionMismatch(what + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("root", "expected an object");
  try {
    ExperimentConfig cfg;
    if (root.contains("arrival")) {
      const json& a = root.at("arrival");
      ArrivalConfig arr;
      if (a.contains("constant")) arr.constant = number(a.at("constant"), "arrival.constant");
      if (a.contains("kernel")) arr.kernel = parse_kernel(a.at("kernel"), "arrival.kernel");
      if (arr.constant.has_value() == arr.kernel.has_value()) fail("arrival", "give exactly one of 'constant' and 'kernel'");
      cfg.arrival = arr;
    }
    if (root.contains("service")) {
      const json& s = root.at("service");
      ServiceConfig svc;
      if (s.contains("kernel")) svc.kernel = parse_kernel(s.at("kernel"), "service.kernel");
      if (s.contains("channel")) svc.channel = parse_channel(s.at("channel"), "service.channel");
      if (svc.kernel.has_value() == svc.channel.has_value()) fail("service", "give exactly one of 'kernel' and 'channel'");
      cfg.service = svc;
    }
    if (root.contains("copulas")) {
      const json& c = root.at("copulas");
      CopulasConfig cop;
      if (c.contains("horizon")) cop.horizon = integer<int>(c.at("horizon"), "copulas.horizon");
      const json& dims = require(c, "dimensions", "copulas");
      if (!dims.is_array() || dims.empty()) fail("copulas.dimensions", "expected a non-empty array");
      for (std::size_t i = 0; i < dims.size(); ++i) {
        const std::string w = "copulas.dimensions[" + std::to_string(i) + "]";
        CopulaDimensionConfig d;
        d.varpi0 = vec(require(dims[i], "varpi0", w), w + ".varpi0");
        const json& seq = require(dims[i], "sequence", w);
        if (!seq.is_array() || seq.empty()) fail(w + ".sequence", "expected a non-empty array");
        for (std::size_t k = 0; k < seq.size(); ++k) d.sequence.push_back(parse_copula(seq[k], w + ".sequence[" + std::to_string(k) + "]"));
        cop.dimensions.push_back(std::move(d));
      }
      cfg.copulas = cop;
    }
    if (root.contains("simulation")) {
      const json& s = root.at("simulation");
      SimulationConfig sim;
      if (s.contains("horizon")) sim.horizon = integer<long>(s.at("horizon"), "simulation.horizon");
      if (s.contains("replications")) sim.replications = integer<long>(s.at("replications"), "simulation.replications");
      if (s.contains("seed")) sim.seed = integer<std::uint64_t>(s.at("seed"), "simulation.seed");
      if (s.contains("threads")) sim.threads = integer<unsigned>(s.at("threads"), "simulation.threads");
      if (s.contains("delay_levels")) sim.delay_levels = vec(s.at("delay_levels"), "simulation.delay_levels");
      if (s.contains("backlog_levels")) sim.backlog_levels = vec(s.at("backlog_levels"), "simulation.backlog_levels");
      cfg.simulation = sim;
    }
    if (root.contains("output")) {
      cfg.output = OutputConfig{text(require(root.at("output"), "directory", "output"), "output.directory")};
    }
    if (root.contains("experiment")) {
      const json& e = root.at("experiment");
      ExperimentConfigEntry ex;
      ex.name = text(require(e, "name", "experiment"), "experiment.name");
      if (e.contains("replications")) ex.replications = integer<long>(e.at("replications"), "experiment.replications");
      if (e.contains("horizon")) ex.horizon = integer<long>(e.at("horizon"), "experiment.horizon");
      if (e.contains("window")) ex.window = integer<int>(e.at("window"), "experiment.window");
      if (e.contains("battery_samples")) ex.battery_samples = integer<long>(e.at("battery_samples"), "experiment.battery_samples");
      cfg.experiment = ex;
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json root = json::object();
  if (config.arrival) {
    root["arrival"] = config.arrival->constant ? json{{"constant", *config.arrival->constant}}
                                               : json{{"kernel", kernel_json(*config.arrival->kernel)}};
  }
  if (config.service) {
    root["service"] = config.service->kernel ? json{{"kernel", kernel_json(*config.service->kernel)}}
                                             : json{{"channel", channel_json(*config.service->channel)}};
  }
  if (config.copulas) {
    json dims = json::array();
    for (const auto& d : config.copulas->dimensions) {
      json seq = json::array();
      for (const auto& c : d.sequence) seq.push_back(copula_json(c));
      dims.push_back({{"varpi0", d.varpi0}, {"sequence", seq}});
    }
    root["copulas"] = {{"horizon", config.copulas->horizon}, {"dimensions", dims}};
  }
  if (config.simulation) {
    const auto& s = *config.simulation;
    json j{{"horizon", s.horizon}, {"replications", s.replications}, {"threads", s.threads},
           {"delay_levels", s.delay_levels}, {"backlog_levels", s.backlog_levels}};
    if (s.seed) j["seed"] = *s.seed;
    root["simulation"] = j;
  }
  if (config.output) root["output"] = {{"directory", config.output->directory}};
  if (config.experiment) {
    const auto& e = *config.experiment;
    root["experiment"] = {{"name", e.name}, {"replications", e.replications}, {"horizon", e.horizon},
                          {"window", e.window}, {"battery_samples", e.battery_samples}};
  }
  return root.dump(2) + "\n";
}

IncrementLaw build_law(const LawConfig& law) {
  if (law.type == "constant") return IncrementLaw::constant(law.value);
  if (law.type == "pmf") return IncrementLaw::pmf(law.support, law.probs);
  if (law.type == "rayleigh") return IncrementLaw::rayleigh(law.bandwidth, law.snr);
  if (law.type == "gaussian") return IncrementLaw::gaussian(law.mean, law.variance, law.points);
  if (law.inner.size() != 1) throw ConfigError("config: " + law.type + " law needs one inner law");
  if (law.type == "negated") return IncrementLaw::negated(build_law(law.inner.front()));
  if (law.type == "shifted") return IncrementLaw::shifted(build_law(law.inner.front()), law.offset);
  throw ConfigError("config: unknown law type '" + law.type + "'");
}

MapKernel build_kernel(const KernelConfig& kernel) {
  const Eigen::MatrixXd p = to_eigen(kernel.transition, "kernel transition");
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<IncrementLaw> laws;
  if (kernel.increments.size() == 1 && n != 1) {
    if (kernel.increments.front().size() != n) throw DimensionMismatch("kernel increments: destination row has wrong length");
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& law : kernel.increments.front()) laws.push_back(build_law(law));
  } else {
    if (kernel.increments.size() != n) throw DimensionMismatch("kernel increments: wrong number of rows");
    for (const auto& row : kernel.increments) {
      if (row.size() != n) throw DimensionMismatch("kernel increments: wrong row length");
      for (const auto& law : row) laws.push_back(build_law(law));
    }
  }
  const Eigen::VectorXd init = kernel.initial_dist.empty() ? stationary_distribution(p) : to_eigen(kernel.initial_dist);
  return MapKernel(kernel.labels, p, std::move(laws), init);
}

CopulaSpec build_copula(const CopulaConfig& c) {
  if (c.family == "m") return CopulaSpec::m();
  if (c.family == "w") return CopulaSpec::w();
  if (c.family == "p") return CopulaSpec::p();
  if (c.family == "frechet") return CopulaSpec::frechet(c.weights.at(0), c.weights.at(1), c.weights.at(2));
  if (c.family == "frechet1") return CopulaSpec::frechet1(c.alpha);
  if (c.family == "gauss2") return CopulaSpec::gauss2(c.rho);
  if (c.family == "grid") {
    const Eigen::MatrixXd values = to_eigen(c.values, "grid copula values");
    if (c.u_nodes.empty()) return CopulaSpec::grid(values);
    return CopulaSpec::grid(c.u_nodes, c.v_nodes, values);
  }
  throw ConfigError("config: unknown copula family '" + c.family + "'");
}

ChannelSpec build_channel(const ChannelConfig& channel) {
  ChannelSpec spec;
  spec.bandwidth = channel.bandwidth_hz;
  spec.snr = to_eigen(channel.snr, "channel snr");
  spec.power_states = channel.power_states;
  spec.validate();
  return spec;
}

ControlPlan build_plan(const ExperimentConfig& config) {
  if (!config.copulas) throw ConfigError("config: missing 'copulas' section");
  std::vector<std::vector<CopulaSpec>> seqs;
  std::vector<Eigen::VectorXd> varpi0;
  for (const auto& d : config.copulas->dimensions) {
    std::vector<CopulaSpec> seq;
    for (const auto& c : d.sequence) seq.push_back(build_copula(c));
    seqs.push_back(std::move(seq));
    varpi0.push_back(to_eigen(d.varpi0));
  }
  return dependence_control(seqs, varpi0, config.copulas->horizon);
}

MapKernel build_arrival(const ExperimentConfig& config) {
  if (!config.arrival) throw ConfigError("config: missing 'arrival' section");
  if (config.arrival->constant) return MapKernel::single_state(IncrementLaw::constant(*config.arrival->constant), "const");
  return build_kernel(*config.arrival->kernel);
}

MapKernel build_service(const ExperimentConfig& config) {
  if (!config.service) throw ConfigError("config: missing 'service' section");
  if (config.service->kernel) return build_kernel(*config.service->kernel);
  const ChannelConfig& ch = *config.service->channel;
  const ChannelSpec spec = build_channel(ch);
  Eigen::MatrixXd p;
  Eigen::VectorXd init;
  if (ch.plan) {
    const ControlPlan plan = build_plan(config);
    p = plan.per_dimension.front().transitions.front();
    init = plan.per_dimension.front().distributions.front();
  } else {
    p = to_eigen(ch.transition, "channel transition");
    init = stationary_distribution(p);
  }
  if (!ch.initial_dist.empty()) init = to_eigen(ch.initial_dist);
  return capacity_kernel(p, spec, init);
}

}  // namespace depctl
