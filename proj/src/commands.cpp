#include "depctl/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "depctl/bounds.hpp"
#include "depctl/channel.hpp"
#include "depctl/config.hpp"
#include "depctl/error.hpp"
#include "depctl/experiments.hpp"
#include "depctl/order.hpp"
#include "depctl/sim.hpp"
#include "depctl/stats.hpp"

namespace depctl {

namespace {

// Stream offset for the capacity path in simulate; far above the tail
// replications' streams.
constexpr std::uint64_t kCapacityStream = std::uint64_t{1} << 40;
constexpr int kTransientPoints = 10;

class Formatter {
 public:
  explicit Formatter(int decimals) : decimals_(decimals) {}
  std::string operator()(double x) const {
    char buf[64];
    if (std::isnan(x)) return "nan";
    if (decimals_ >= 0) {
      std::snprintf(buf, sizeof buf, "%.*f", decimals_, x);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", x);
    }
    return buf;
  }

 private:
  int decimals_;
};

ExperimentConfig read_config(const CommandOptions& o) {
  if (!o.config_path.empty()) return load_config(o.config_path);
  if (!o.config_text.empty()) return parse_config(o.config_text);
  throw ConfigError("no configuration given (--config)");
}

std::string csv_file(const std::string& command) { return command + ".csv"; }

void check_stable(const MapKernel& arrival, const MapKernel& service) {
  const double a = mean_rate(arrival);
  const double s = mean_rate(service);
  if (a >= s) throw UnstableQueue(a, s);
}

std::uint64_t require_seed(const CommandOptions& o, const ExperimentConfig& cfg) {
  if (o.seed) return *o.seed;
  if (cfg.simulation && cfg.simulation->seed) return *cfg.simulation->seed;
  throw ConfigError("a seed is required (simulation.seed or --seed)");
}

// ---------------------------------------------------------------- spectral

void spectral_columns(std::ostringstream& head, const std::string& prefix, const MapKernel& k) {
  head << ',' << prefix << "_kappa," << prefix << "_kappa_dot";
  for (const char* part : {"_h_", "_v_", "_pi_"}) {
    for (const auto& l : k.labels()) head << ',' << prefix << part << l;
  }
}

double spectral_values(std::ostringstream& row, const MapKernel& k, double theta, const Formatter& f,
                       const std::string& name) {
  SpectralSolution s;
  double dot = 0.0;
  try {
    s = perron(k, theta);
    dot = cgf_derivative(k, theta);
  } catch (const NumericError& e) {
    throw NumericError("perron(" + name + ", theta=" + f(theta) + "): " + e.what());
  }
  row << ',' << f(s.kappa) << ',' << f(dot);
  for (const Eigen::VectorXd* v : {&s.h, &s.v, &s.pi}) {
    for (Eigen::Index i = 0; i < v->size(); ++i) row << ',' << f((*v)(i));
  }
  return s.kappa;
}

CommandResult run_spectral(const CommandOptions& o) {
  const ExperimentConfig cfg = read_config(o);
  if (!cfg.arrival && !cfg.service) throw ConfigError("spectral needs an 'arrival' or 'service' section");
  const Formatter f(o.decimals);
  const std::vector<double> thetas = o.theta.empty() ? std::vector<double>{0.0} : o.theta;
  std::optional<MapKernel> a, s, ns;
  if (cfg.arrival) a = build_arrival(cfg);
  if (cfg.service) {
    s = build_service(cfg);
    ns = negate(*s);
  }
  std::ostringstream out;
  out << "theta";
  if (a) spectral_columns(out, "A", *a);
  if (s) {
    spectral_columns(out, "S", *s);
    spectral_columns(out, "negS", *ns);
  }
  if (a && s) out << ",stability";
  out << '\n';
  for (double theta : thetas) {
    out << f(theta);
    double ka = 0.0, kns = 0.0;
    if (a) ka = spectral_values(out, *a, theta, f, "arrival");
    if (s) {
      spectral_values(out, *s, theta, f, "service");
      kns = spectral_values(out, *ns, theta, f, "negated service");
    }
    if (a && s) out << ',' << f(ka + kns);
    out << '\n';
  }
  return {kExitOk, {{csv_file("spectral"), out.str()}}, {}};
}

// ---------------------------------------------------------------- bounds

void bound_rows(std::ostringstream& out, const std::vector<BoundReport>& rows, const Formatter& f) {
  for (const auto& r : rows) {
    out << f(r.level) << ',' << r.conditioning << ',' << f(r.lower) << ',' << f(r.upper) << ',' << f(r.lower_raw)
        << ',' << f(r.upper_raw) << ',' << f(r.theta_star) << ',' << f(r.h_plus) << ',' << f(r.h_minus) << ','
        << (r.lower != r.lower_raw ? 1 : 0) << ',' << (r.upper != r.upper_raw ? 1 : 0) << '\n';
  }
}

CommandResult run_bounds(const CommandOptions& o) {
  const ExperimentConfig cfg = read_config(o);
  const MapKernel arrival = build_arrival(cfg);
  const MapKernel service = build_service(cfg);
  check_stable(arrival, service);
  const Formatter f(o.decimals);
  std::vector<double> levels = o.levels;
  if (levels.empty() && cfg.simulation) {
    levels = o.mode == "backlog" ? cfg.simulation->backlog_levels : cfg.simulation->delay_levels;
  }
  if (levels.empty()) throw ConfigError("bounds needs --levels or simulation levels in the config");
  const bool constant_arrival = cfg.arrival->constant.has_value();

  std::ostringstream out;
  if (o.mode == "delay" || o.mode == "backlog") {
    out << "level,conditioning,lower,upper,lower_raw,upper_raw,theta_star,h_plus,h_minus,lower_clamped,upper_clamped\n";
    if (o.mode == "delay") {
      if (constant_arrival) {
        bound_rows(out, constant_arrival_bounds(*cfg.arrival->constant, service, levels).delay, f);
      } else {
        bound_rows(out, delay_bounds(arrival, service, levels), f);
      }
    } else {
      bound_rows(out, backlog_bounds(arrival, service, levels), f);
    }
  } else if (o.mode == "horizon") {
    out << "kind,level,y,theta,theta_y,y_gamma,branch,bound,bound_raw,clamped\n";
    for (double level : levels) {
      const HorizonBoundReport d = horizon_delay_bound(arrival, service, o.y, level);
      const HorizonBoundReport b = horizon_backlog_bound(arrival, service, o.y, level);
      for (const auto& [kind, r] : {std::pair<const char*, const HorizonBoundReport&>{"delay", d}, {"backlog", b}}) {
        out << kind << ',' << f(r.level) << ',' << f(r.y) << ',' << f(r.theta) << ',' << f(r.theta_y) << ','
            << f(r.y_gamma) << ',' << to_string(r.branch) << ',' << f(r.bound) << ',' << f(r.bound_raw) << ','
            << (r.bound != r.bound_raw ? 1 : 0) << '\n';
      }
    }
  } else if (o.mode == "dcc") {
    out << "d,epsilon,dcc_upper,theta,asymptotic_cap,lambda_lo,lambda_hi,theta_lo,theta_hi\n";
    for (double d : levels) {
      const DccBound c = dcc_upper(arrival, service, d, o.epsilon);
      const DccInterval iv = constant_dcc_interval(service, d, o.epsilon, service.initial_dist());
      out << f(d) << ',' << f(o.epsilon) << ',' << f(c.value) << ',' << f(c.theta) << ',' << f(c.asymptotic_cap)
          << ',' << f(iv.lambda_lo) << ',' << f(iv.lambda_hi) << ',' << f(iv.theta_lo) << ',' << f(iv.theta_hi)
          << '\n';
    }
  } else {
    throw InvalidArgument("unknown bounds mode '" + o.mode + "' (delay | backlog | horizon | dcc)");
  }
  return {kExitOk, {{csv_file("bounds"), out.str()}}, {}};
}

// ---------------------------------------------------------------- control

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

CommandResult run_control(const CommandOptions& o) {
  const ExperimentConfig cfg = read_config(o);
  const ControlPlan plan = build_plan(cfg);
  const Formatter f(o.decimals);
  std::ostringstream out;
  Eigen::Index width = 0;
  for (const auto& d : plan.per_dimension) width = std::max(width, d.transitions.front().cols());
  out << "dimension,step,from";
  for (Eigen::Index c = 0; c < width; ++c) out << ",p" << c;
  out << '\n';
  nlohmann::json dims = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.per_dimension.size(); ++i) {
    const DimensionPlan& d = plan.per_dimension[i];
    nlohmann::json transitions = nlohmann::json::array();
    nlohmann::json distributions = nlohmann::json::array();
    for (std::size_t step = 0; step < d.transitions.size(); ++step) {
      const Eigen::MatrixXd& p = d.transitions[step];
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        out << i << ',' << step << ',' << r;
        for (Eigen::Index c = 0; c < width; ++c) out << ',' << (c < p.cols() ? f(p(r, c)) : std::string());
        out << '\n';
      }
      transitions.push_back(matrix_json(p));
    }
    for (const auto& v : d.distributions) distributions.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    dims.push_back({{"transition", transitions.front()},
                    {"initial_dist", distributions.front()},
                    {"transitions", transitions},
                    {"distributions", distributions}});
  }
  const nlohmann::json fragment{{"horizon", plan.horizon}, {"dimensions", dims}};
  return {kExitOk, {{csv_file("control"), out.str()}, {"control.json", fragment.dump(2) + "\n"}}, {}};
}

// ---------------------------------------------------------------- simulate

void tail_rows(std::ostringstream& out, const char* kind, const std::vector<TailEstimate>& est,
               const std::optional<std::vector<BoundReport>>& bounds, const Formatter& f) {
  for (std::size_t i = 0; i < est.size(); ++i) {
    const TailEstimate& e = est[i];
    out << kind << ',' << f(e.level) << ',' << f(e.p_hat) << ',' << f(e.std_err) << ',' << e.hits << ','
        << e.replications << ',' << (e.inconclusive ? 1 : 0) << ',';
    if (bounds) {
      const BoundReport& b = (*bounds)[i];
      const bool inside = e.p_hat >= b.lower - 3.0 * e.std_err && e.p_hat <= b.upper + 3.0 * e.std_err;
      out << f(b.lower) << ',' << f(b.upper) << ',' << (e.inconclusive ? "" : (inside ? "1" : "0"));
    } else {
      out << ",,";
    }
    out << ",\n";
  }
}

std::vector<BoundReport> averaged(const std::vector<BoundReport>& rows) {
  std::vector<BoundReport> out;
  for (const auto& r : rows) {
    if (r.conditioning == "avg") out.push_back(r);
  }
  return out;
}

CommandResult run_simulate(const CommandOptions& o) {
  const ExperimentConfig cfg = read_config(o);
  const std::uint64_t seed = require_seed(o, cfg);
  const MapKernel arrival = build_arrival(cfg);
  const MapKernel service = build_service(cfg);
  check_stable(arrival, service);
  const SimulationConfig sim = cfg.simulation.value_or(SimulationConfig{});
  const Formatter f(o.decimals);

  TailRequest req;
  req.delay_levels = o.levels.empty() ? sim.delay_levels : o.levels;
  req.backlog_levels = sim.backlog_levels;
  req.replications = sim.replications;
  req.horizon = sim.horizon;
  req.seed = seed;
  req.threads = sim.threads;
  const TailResult tails = tail_estimate(arrival, service, req);

  std::optional<std::vector<BoundReport>> delay_b, backlog_b;
  try {
    if (cfg.arrival->constant) {
      delay_b = averaged(constant_arrival_bounds(*cfg.arrival->constant, service, req.delay_levels).delay);
    } else {
      delay_b = averaged(delay_bounds(arrival, service, req.delay_levels));
    }
    backlog_b = averaged(backlog_bounds(arrival, service, req.backlog_levels));
  } catch (const NoRootInDomain&) {
    // No positive stability root (e.g. zero traffic): bounds are left blank.
    delay_b.reset();
    backlog_b.reset();
  }

  std::ostringstream out;
  out << "kind,level,estimate,std_err,hits,replications,inconclusive,lower,upper,sandwich,p_value\n";
  tail_rows(out, "delay", tails.delay, delay_b, f);
  tail_rows(out, "backlog", tails.backlog, backlog_b, f);

  if (cfg.service->channel && cfg.service->channel->plan) {
    const ControlPlan plan = build_plan(cfg);
    const ChannelSpec channel = build_channel(*cfg.service->channel);
    const CapacityPath path = controlled_capacity_process(plan, channel, sim.horizon, seed, kCapacityStream);
    const stats::Correlation c = stats::lag_correlation(path.capacity, 1);
    out << "capacity_lag1,1," << f(c.r) << ",,," << c.n << ",,,,," << f(c.p_value) << '\n';
    for (int k = 1; k <= kTransientPoints; ++k) {
      const long t = std::max(1L, sim.horizon * k / kTransientPoints);
      out << "transient_capacity," << t << ',' << f(path.transient[static_cast<std::size_t>(t - 1)]) << ",,,1,,,,,\n";
    }
  }
  return {kExitOk, {{csv_file("simulate"), out.str()}}, {}};
}

// ---------------------------------------------------------------- ordercheck

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw ConfigError("'" + path + "': non-numeric row '" + line + "'");
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size()) throw ConfigError("'" + path + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("'" + path + "': no data rows");
  return rows;
}

// Two columns: value, probability. Rows are sorted and merged.
IncrementLaw read_pmf(const std::string& path) {
  const auto rows = read_numeric_csv(path);
  if (rows.front().size() != 2) throw ConfigError("'" + path + "': expected columns value,prob");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r[0], r[1]);
  std::sort(pts.begin(), pts.end());
  std::vector<double> support, probs;
  for (const auto& [x, p] : pts) {
    if (!support.empty() && support.back() == x) {
      probs.back() += p;
    } else {
      support.push_back(x);
      probs.push_back(p);
    }
  }
  if (support.size() == 1) return IncrementLaw::constant(support.front());
  return IncrementLaw::pmf(support, probs);
}

Eigen::MatrixXd read_samples(const std::string& path) {
  const auto rows = read_numeric_csv(path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

void battery_text(std::ostringstream& out, const OrderReport& r, const Formatter& f) {
  out << "verdict: " << to_string(r.verdict) << '\n'
      << "marginals_match: " << (r.marginals_match ? "true" : "false") << '\n'
      << "z_threshold: " << f(r.z_threshold) << '\n'
      << "note: " << r.note << '\n'
      << "test,mean_diff,std_err,z\n";
  for (const auto& t : r.tests) {
    out << t.id << ',' << f(t.mean_diff) << ',' << f(t.std_err) << ','
        << f(t.std_err > 0.0 ? t.mean_diff / t.std_err : 0.0) << '\n';
  }
}

CommandResult run_ordercheck(const CommandOptions& o) {
  const Formatter f(o.decimals);
  std::ostringstream out;
  if (!o.pmf_x.empty() || !o.pmf_y.empty()) {
    if (o.pmf_x.empty() || o.pmf_y.empty()) throw ConfigError("give both --pmf-x and --pmf-y");
    const ConvexOrderResult r = convex_order_leq(read_pmf(o.pmf_x), read_pmf(o.pmf_y));
    out << "relation: X <=cx Y\n"
        << "verdict: " << (r.holds ? "holds" : "fails") << '\n'
        << "means_equal: " << (r.means_equal ? "true" : "false") << '\n'
        << "mean_x: " << f(r.mean_x) << '\n'
        << "mean_y: " << f(r.mean_y) << '\n'
        << "max_stop_loss_excess: " << f(r.max_stop_loss_excess) << '\n'
        << "at: " << f(r.at) << '\n';
  } else if (!o.samples_x.empty() || !o.samples_y.empty()) {
    if (o.samples_x.empty() || o.samples_y.empty()) throw ConfigError("give both --samples-x and --samples-y");
    out << "relation: X <=sm Y\n";
    battery_text(out, supermodular_battery(read_samples(o.samples_x), read_samples(o.samples_y)), f);
  } else {
    const ExperimentConfig cfg = read_config(o);
    if (!cfg.experiment) throw ConfigError("ordercheck --config needs an 'experiment' section");
    ExperimentSpec spec;
    spec.name = cfg.experiment->name;
    spec.seed = require_seed(o, cfg);
    spec.replications = cfg.experiment->replications;
    spec.horizon = cfg.experiment->horizon;
    spec.window = cfg.experiment->window;
    spec.battery_samples = cfg.experiment->battery_samples;
    if (cfg.simulation) spec.threads = cfg.simulation->threads;
    const ExperimentReport rep = ordering_experiment(spec);
    out << "experiment: " << rep.name << '\n'
        << "direction: " << rep.direction << '\n'
        << "ordered: " << (rep.ordered ? "true" : "false") << '\n'
        << "note: " << rep.note << '\n';
    if (!rep.rows.empty()) {
      out << "label,parameter,analytic_rate,empirical_rate,fit_points\n";
      for (const auto& r : rep.rows) {
        out << r.label << ',' << f(r.parameter) << ',' << f(r.analytic_rate) << ',' << f(r.empirical_rate) << ','
            << r.fit_points << '\n';
      }
    }
    for (const auto& [name, b] : rep.batteries) {
      out << "battery: " << name << '\n';
      battery_text(out, b, f);
    }
  }
  return {kExitOk, {{"ordercheck.txt", out.str()}}, {}};
}

}  // namespace

std::pair<int, std::string> classify_error(const std::exception& e) {
  if (const auto* u = dynamic_cast<const UnstableQueue*>(&e)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "unstable queue: arrival drift %.17g >= service drift %.17g", u->arrival_rate(),
                  u->service_rate());
    return {kExitUnstable, buf};
  }
  if (dynamic_cast<const CopulaError*>(&e)) return {kExitCopula, std::string("copula error: ") + e.what()};
  if (dynamic_cast<const NumericError*>(&e)) return {kExitNumeric, std::string("numeric failure: ") + e.what()};
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e)) {
    return {kExitUsage, std::string("error: ") + e.what()};
  }
  return {1, std::string("internal error: ") + e.what()};
}

CommandResult run_command(const std::string& command, const CommandOptions& options) {
  try {
    if (command == "spectral") return run_spectral(options);
    if (command == "bounds") return run_bounds(options);
    if (command == "control") return run_control(options);
    if (command == "simulate") return run_simulate(options);
    if (command == "ordercheck") return run_ordercheck(options);
    return {kExitUsage, {}, "unknown command '" + command + "'"};
  } catch (const std::exception& e) {
    auto [code, message] = classify_error(e);
    return {code, {}, message};
  }
}

}  // namespace depctl
