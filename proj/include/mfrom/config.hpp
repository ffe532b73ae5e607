#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfrom/greedy_rbm.hpp"
#include "mfrom/mesh.hpp"
#include "mfrom/mf_driver.hpp"
#include "mfrom/param_space.hpp"

namespace mfrom {

enum class Method { mf, greedy, pod };

std::string to_string(Method method);

struct AxisSpec {
  AxisKind kind = AxisKind::uniform;
  Range range{0.0, 1.0};
  int count = 2;
};

struct GridSpec {
  std::string kind = "tensor";      // "tensor", "lhs" or "csv"
  std::vector<AxisSpec> axes;       // tensor
  int lhs_n = 0;
  int lhs_dim = 0;
  Range lhs_range{0.01, 10.0};
  Scale lhs_scale = Scale::linear;
  std::string csv_path;             // csv: roles taken from the file
  int n_val = 0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::string source;               // file it was read from, if any
  Layout problem = Layout::heat2d;
  Method method = Method::mf;
  int fine_nodes = 0;
  int coarse_nodes = 0;
  double block_side = 0.5;          // heat2d only
  GridSpec grid;
  MfOptions mf;
  GreedyOptions greedy;
  bool validation = true;
  std::string validation_cache;     // empty: solve in place
  int trials = 10;
  std::string out_dir = "out";
};

// Defaults for a problem, matching the bundled configurations.
RunConfig default_config(Layout problem);

// INI ("*.cfg", "*.ini") or JSON ("*.json"). Throws ConfigError naming the
// offending field.
RunConfig load_config(const std::string &path);
RunConfig parse_config_text(const std::string &text, bool json);

// Field-level checks run before any solve. Throws ConfigError.
void validate(const RunConfig &cfg);

// Human-readable plan for --dry-run.
std::string describe(const RunConfig &cfg);

} // namespace mfrom
