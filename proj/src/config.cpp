#include "tvdopt/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tvdopt/errors.hpp"

namespace tvdopt {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"iterations", "seed", "mode", "output", "init", "init_scale"}},
      {"problem", {"type"}},
      {"algorithm", {"alpha", "rho", "sigma", "m"}},
      {"schedule", {"kind", "matrices", "tolerance", "nonnegative", "seed"}},
      {"quadratic", {"agents", "dimension", "mu", "L", "seed"}},
      {"localization", {"agents", "target", "seed", "count"}},
  };
  return keys;
}

std::string trimmed(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return std::nullopt;
  return trimmed(*v);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    return parse_weight(text);
  } catch (const ConfigError&) {
    throw ConfigError("'" + key + "' must be a number, got '" + text + "'");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("'" + key + "' must be a nonnegative integer, got '" + text + "'");
  }
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "' must be true or false, got '" + text + "'");
}

// "auto" (or absent) leaves the value to be derived
std::optional<double> optional_number(const pt::ptree& tree, const std::string& key) {
  const auto v = get(tree, key);
  if (!v || *v == "auto") return std::nullopt;
  return to_double(key, *v);
}

Point2 to_point(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::string a, b, extra;
  if (!(in >> a >> b) || (in >> extra)) {
    throw ConfigError("'" + key + "' must be two numbers, got '" + text + "'");
  }
  return {to_double(key, a), to_double(key, b)};
}

std::vector<Point2> to_points(const std::string& key, const std::string& text) {
  std::vector<Point2> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (trimmed(item).empty()) continue;
    out.push_back(to_point(key, item));
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }

  std::set<std::string> matrix_keys;
  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (it == allowed_keys().end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (section == "schedule" && key.rfind("matrix", 0) == 0 && key != "matrices") {
        matrix_keys.insert(key);
        continue;
      }
      if (!it->second.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  RunConfig cfg;
  if (auto v = get(tree, "run.iterations")) cfg.iterations = to_unsigned("run.iterations", *v);
  if (auto v = get(tree, "run.seed")) cfg.seed = to_unsigned("run.seed", *v);
  if (auto v = get(tree, "run.mode")) {
    if (*v == "vectorized") {
      cfg.mode = ExecutionMode::vectorized;
    } else if (*v == "netsim") {
      cfg.mode = ExecutionMode::netsim;
    } else {
      throw ConfigError("run.mode must be vectorized or netsim");
    }
  }
  if (auto v = get(tree, "run.output")) cfg.output = *v;

  const auto type = get(tree, "problem.type").value_or("localization");
  if (type == "quadratic") {
    cfg.problem = ProblemKind::quadratic;
    cfg.init = InitKind::random;
  } else if (type == "localization") {
    cfg.problem = ProblemKind::localization;
    cfg.init = InitKind::positions;
  } else {
    throw ConfigError("problem.type must be quadratic or localization, got '" + type + "'");
  }
  if (auto v = get(tree, "run.init")) {
    if (*v == "positions") {
      if (cfg.problem != ProblemKind::localization) {
        throw ConfigError("run.init = positions needs a localization problem");
      }
      cfg.init = InitKind::positions;
    } else if (*v == "random") {
      cfg.init = InitKind::random;
    } else {
      throw ConfigError("run.init must be positions or random");
    }
  }
  if (auto v = get(tree, "run.init_scale")) cfg.init_scale = to_double("run.init_scale", *v);

  if (auto v = get(tree, "quadratic.agents")) cfg.quadratic.agents = to_unsigned("quadratic.agents", *v);
  if (auto v = get(tree, "quadratic.dimension")) {
    cfg.quadratic.dim = to_unsigned("quadratic.dimension", *v);
  }
  if (auto v = get(tree, "quadratic.mu")) cfg.quadratic.mu = to_double("quadratic.mu", *v);
  if (auto v = get(tree, "quadratic.L")) cfg.quadratic.L = to_double("quadratic.L", *v);
  if (auto v = get(tree, "quadratic.seed")) cfg.quadratic.seed = to_unsigned("quadratic.seed", *v);

  if (cfg.problem == ProblemKind::localization) {
    const Point2 target =
        to_point("localization.target", get(tree, "localization.target").value_or("1 1"));
    std::vector<Point2> agents;
    if (auto v = get(tree, "localization.agents")) {
      agents = to_points("localization.agents", *v);
    } else {
      const auto seed = to_unsigned("localization.seed", get(tree, "localization.seed").value_or("0"));
      const auto count =
          to_unsigned("localization.count", get(tree, "localization.count").value_or("5"));
      agents = generate_agent_positions(count, target, seed);
    }
    cfg.localization = LocalizationConfig::make(std::move(agents), target);
  }

  cfg.alpha = optional_number(tree, "algorithm.alpha");
  cfg.rho = optional_number(tree, "algorithm.rho");
  cfg.sigma = optional_number(tree, "algorithm.sigma");
  if (auto v = get(tree, "algorithm.m"); v && *v != "auto") cfg.m = to_unsigned("algorithm.m", *v);
  if (cfg.alpha && !(*cfg.alpha > 0.0)) throw ConfigError("'algorithm.alpha' must be positive");
  if (cfg.rho && !(*cfg.rho >= 0.0 && *cfg.rho < 1.0)) {
    throw ConfigError("'algorithm.rho' must lie in [0, 1)");
  }
  if (cfg.sigma && !(*cfg.sigma >= 0.0 && *cfg.sigma < 1.0)) {
    throw ConfigError("'algorithm.sigma' must lie in [0, 1)");
  }
  if (cfg.m && *cfg.m == 0) throw ConfigError("'algorithm.m' must be at least 1");

  if (auto v = get(tree, "schedule.kind")) {
    if (*v == "constant") {
      cfg.schedule.kind = ScheduleKind::constant;
    } else if (*v == "cyclic") {
      cfg.schedule.kind = ScheduleKind::cyclic;
    } else if (*v == "random") {
      cfg.schedule.kind = ScheduleKind::random_choice;
    } else {
      throw ConfigError("schedule.kind must be constant, cyclic or random");
    }
  }
  if (auto v = get(tree, "schedule.matrices")) cfg.schedule.source = *v;
  if (auto v = get(tree, "schedule.tolerance")) {
    cfg.schedule.options.tolerance = to_double("schedule.tolerance", *v);
  }
  if (auto v = get(tree, "schedule.nonnegative")) {
    cfg.schedule.options.require_nonnegative = to_bool("schedule.nonnegative", *v);
  }
  if (auto v = get(tree, "schedule.seed")) cfg.schedule.seed = to_unsigned("schedule.seed", *v);

  if (cfg.schedule.source == "explicit") {
    if (matrix_keys.empty()) {
      throw ConfigError("schedule.matrices = explicit needs matrix1, matrix2, ... keys");
    }
    // matrix1, matrix2, ... in numeric order
    std::vector<std::pair<std::uint64_t, std::string>> ordered;
    for (const auto& key : matrix_keys) {
      ordered.emplace_back(to_unsigned("schedule." + key, key.substr(6)), key);
    }
    std::sort(ordered.begin(), ordered.end());
    for (const auto& [index, key] : ordered) {
      cfg.schedule.matrices.push_back(parse_gossip_matrix(*get(tree, "schedule." + key)));
    }
  } else if (!matrix_keys.empty()) {
    throw ConfigError("matrixN keys need schedule.matrices = explicit");
  } else if (cfg.schedule.source != "pair" && cfg.schedule.source != "ring" &&
             cfg.schedule.source != "complete" && cfg.schedule.source != "identity") {
    throw ConfigError("schedule.matrices must be pair, ring, complete, identity or explicit");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Problem build_problem(const RunConfig& config) {
  if (config.problem == ProblemKind::quadratic) return make_quadratic_problem(config.quadratic);
  return make_localization_problem(config.localization);
}

std::vector<GossipMatrix> schedule_matrices(const RunConfig& config) {
  const std::size_t n = config.problem == ProblemKind::quadratic ? config.quadratic.agents
                                                                 : config.localization.agents.size();
  const auto& source = config.schedule.source;
  if (source == "explicit") return config.schedule.matrices;
  if (source == "pair") {
    auto [first, second] = reference_gossip_pair();
    return {first, second};
  }
  if (source == "ring") return {GossipMatrix::ring(n)};
  if (source == "complete") return {GossipMatrix::complete(n)};
  return {GossipMatrix::identity(n)};
}

ResolvedRun resolve(const RunConfig& config) {
  Problem problem = build_problem(config);
  const std::size_t n = problem.agents();
  const std::size_t d = problem.dim();

  auto matrices = schedule_matrices(config);
  const std::uint64_t schedule_seed = config.schedule.seed.value_or(config.seed);
  GossipSchedule schedule = [&] {
    switch (config.schedule.kind) {
      case ScheduleKind::constant:
        if (matrices.size() != 1) {
          throw ConfigError("a constant schedule takes exactly one matrix");
        }
        return GossipSchedule::constant(std::move(matrices.front()), config.schedule.options);
      case ScheduleKind::cyclic:
        return GossipSchedule::cyclic(std::move(matrices), config.schedule.options);
      case ScheduleKind::random_choice:
        break;
    }
    return GossipSchedule::random_choice(std::move(matrices), schedule_seed,
                                         config.schedule.options);
  }();
  if (schedule.agents() != n) {
    throw ConfigError("schedule matrices are " + std::to_string(schedule.agents()) +
                      "x" + std::to_string(schedule.agents()) + " but the problem has " +
                      std::to_string(n) + " agents");
  }

  double alpha = 0.0;
  double rho = 0.0;
  if (config.problem == ProblemKind::quadratic) {
    const auto derived = params_from_one_point_convexity({config.quadratic.mu, config.quadratic.L});
    alpha = config.alpha.value_or(derived.alpha);
    rho = config.rho.value_or(derived.rho);
  } else {
    const Vector target{config.localization.target[0], config.localization.target[1]};
    alpha = config.alpha ? *config.alpha : optimal_stepsize(problem, target);
    rho = config.rho ? *config.rho : target_contraction_factor(config.localization, alpha);
  }
  const double sigma = config.sigma.value_or(schedule.max_gap());
  const AlgorithmParams params = AlgorithmParams::make(alpha, rho, sigma, config.m);

  StackedVector x0(n, d);
  if (config.init == InitKind::positions) {
    for (std::size_t i = 0; i < n; ++i) {
      x0.block(i)[0] = config.localization.agents[i][0];
      x0.block(i)[1] = config.localization.agents[i][1];
    }
  } else {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_scale);
    const Vector center = problem.optimizer().value_or(Vector(d, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t e = 0; e < d; ++e) x0.block(i)[e] = center[e] + normal(rng);
    }
  }
  Vector start(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t e = 0; e < d; ++e) start[e] += x0.block(i)[e] / static_cast<double>(n);
  }
  return {std::move(problem), std::move(schedule), params, initial_state(std::move(x0)),
          std::move(start)};
}

}  // namespace tvdopt
