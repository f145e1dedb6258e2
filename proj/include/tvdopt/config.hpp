#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tvdopt/algorithm.hpp"
#include "tvdopt/gossip.hpp"
#include "tvdopt/localization.hpp"
#include "tvdopt/objective.hpp"

namespace tvdopt {

enum class ProblemKind { quadratic, localization };
enum class ExecutionMode { vectorized, netsim };
enum class InitKind { positions, random };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::random_choice;
  std::string source = "pair";  // pair | ring | complete | identity | explicit
  std::vector<GossipMatrix> matrices;
  ScheduleOptions options;
  std::optional<std::uint64_t> seed;  // defaults to the run seed
};

/// Parsed experiment description. Missing alpha/rho/sigma are derived from
/// the problem and schedule when the run is resolved.
struct RunConfig {
  ProblemKind problem = ProblemKind::localization;
  QuadraticProblemSpec quadratic;
  LocalizationConfig localization;

  ScheduleSpec schedule;

  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> sigma;
  std::optional<std::size_t> m;

  std::size_t iterations = 200;
  std::uint64_t seed = 0;
  ExecutionMode mode = ExecutionMode::vectorized;
  InitKind init = InitKind::positions;
  double init_scale = 3.0;
  std::optional<std::filesystem::path> output;
};

/// Throws ConfigError on unknown sections/keys or malformed values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Everything needed to execute a run, with derived parameters filled in.
struct ResolvedRun {
  Problem problem;
  GossipSchedule schedule;
  AlgorithmParams params;
  AlgorithmState initial;
  Vector centralized_start;
};

ResolvedRun resolve(const RunConfig& config);

/// The schedule's matrices as configured (built-ins expanded), unvalidated.
std::vector<GossipMatrix> schedule_matrices(const RunConfig& config);

Problem build_problem(const RunConfig& config);

}  // namespace tvdopt
