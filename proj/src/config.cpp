#include "mfrom/config.hpp"

#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mfrom/errors.hpp"

namespace pt = boost::property_tree;

namespace mfrom {

namespace {

template <class T>
T get(const pt::ptree &tree, const std::string &key, T fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node)
    return fallback;
  const auto value = node->get_value_optional<T>();
  if (!value)
    throw ConfigError(key + ": cannot parse '" + node->data() + "'");
  return *value;
}

bool get_bool(const pt::ptree &tree, const std::string &key, bool fallback) {
  const std::string s = get<std::string>(tree, key, fallback ? "true" : "false");
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

AxisKind parse_axis_kind(const std::string &s, const std::string &key) {
  if (s == "uniform")
    return AxisKind::uniform;
  if (s == "log")
    return AxisKind::log;
  if (s == "symlog")
    return AxisKind::symlog;
  throw ConfigError(key + ": unknown axis kind '" + s + "' (uniform, log, symlog)");
}

std::string axis_kind_name(AxisKind k) {
  switch (k) {
  case AxisKind::uniform:
    return "uniform";
  case AxisKind::log:
    return "log";
  case AxisKind::symlog:
    return "symlog";
  }
  return "?";
}

// "log 0.1 10 50"
AxisSpec parse_axis(const std::string &text, const std::string &key) {
  std::istringstream is(text);
  std::string kind;
  AxisSpec a;
  if (!(is >> kind >> a.range.lo >> a.range.hi >> a.count))
    throw ConfigError(key + ": expected '<kind> <lo> <hi> <count>', got '" + text + "'");
  a.kind = parse_axis_kind(kind, key);
  return a;
}

template <class E>
E pick(const std::string &value, const std::string &key, std::initializer_list<std::pair<const char *, E>> options) {
  std::string names;
  for (const auto &[name, e] : options) {
    if (value == name)
      return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key + ": unknown value '" + value + "' (" + names + ")");
}

RunConfig from_tree(const pt::ptree &t) {
  const Layout problem = [&] {
    try {
      return parse_layout(get<std::string>(t, "problem.name", "heat2d"));
    } catch (const std::exception &e) {
      throw ConfigError(std::string("problem.name: ") + e.what());
    }
  }();
  RunConfig c = default_config(problem);
  c.method = pick<Method>(get<std::string>(t, "method.name", to_string(c.method)), "method.name",
                          {{"mf", Method::mf}, {"greedy", Method::greedy}, {"pod", Method::pod}});
  c.fine_nodes = get(t, "problem.fine_nodes", c.fine_nodes);
  c.coarse_nodes = get(t, "problem.coarse_nodes", c.coarse_nodes);
  c.block_side = get(t, "problem.block_side", c.block_side);

  GridSpec &g = c.grid;
  g.kind = get<std::string>(t, "params.kind", g.kind);
  if (g.kind == "tensor") {
    if (t.get_child_optional("params.axis1")) {
      g.axes.clear();
      for (int k = 1; t.get_child_optional("params.axis" + std::to_string(k)); ++k)
        g.axes.push_back(parse_axis(get<std::string>(t, "params.axis" + std::to_string(k), ""),
                                    "params.axis" + std::to_string(k)));
    }
  } else if (g.kind == "lhs") {
    g.lhs_n = get(t, "params.n", g.lhs_n);
    g.lhs_dim = get(t, "params.dim", g.lhs_dim);
    g.lhs_range.lo = get(t, "params.lo", g.lhs_range.lo);
    g.lhs_range.hi = get(t, "params.hi", g.lhs_range.hi);
    g.lhs_scale = pick<Scale>(get<std::string>(t, "params.scale", g.lhs_scale == Scale::log ? "log" : "linear"),
                              "params.scale", {{"linear", Scale::linear}, {"log", Scale::log}});
  } else if (g.kind == "csv") {
    g.csv_path = get<std::string>(t, "params.path", "");
  } else {
    throw ConfigError("params.kind: unknown value '" + g.kind + "' (tensor, lhs, csv)");
  }
  g.n_val = get(t, "params.n_val", g.n_val);
  g.seed = get<std::uint64_t>(t, "params.seed", g.seed);

  MfOptions &m = c.mf;
  m.sketch = pick<SketchKind>(get<std::string>(t, "method.sketch", to_string(m.sketch)), "method.sketch",
                              {{"random", SketchKind::random}, {"coarse", SketchKind::coarse}});
  m.sketch_size = get(t, "method.sketch_size", m.sketch_size);
  m.points_per_iter = get(t, "method.points_per_iter", m.points_per_iter);
  m.tol = get(t, "method.tol", m.tol);
  m.max_iter = get(t, "method.max_iter", m.max_iter);
  m.seed = get<std::uint64_t>(t, "method.seed", m.seed);
  m.require_val = get_bool(t, "method.require_val", m.require_val);
  m.gs_tol = get(t, "method.gs_tol", m.gs_tol);
  m.rank_tol = get(t, "method.rank_tol", m.rank_tol);
  m.deim.rows = pick<InterpRows>(get<std::string>(t, "method.deim_rows", "selected"), "method.deim_rows",
                                 {{"selected", InterpRows::selected}, {"leading", InterpRows::leading}});
  m.history = pick<HistoryPolicy>(get<std::string>(t, "method.history", m.history == HistoryPolicy::returned ? "returned" : "consumed"),
                                  "method.history",
                                  {{"returned", HistoryPolicy::returned}, {"consumed", HistoryPolicy::consumed}});
  m.ortho = pick<OrthoOrder>(get<std::string>(t, "method.ortho", m.ortho == OrthoOrder::energy ? "energy" : "columns"),
                             "method.ortho", {{"energy", OrthoOrder::energy}, {"columns", OrthoOrder::columns}});

  m.normalize = get_bool(t, "method.normalize", m.normalize);

  GreedyOptions &gr = c.greedy;
  gr.tol = m.tol;
  gr.max_iter = m.max_iter;
  gr.gs_tol = m.gs_tol;
  gr.relative = get_bool(t, "method.greedy_relative", gr.relative);

  c.validation = get_bool(t, "diagnostics.validation", c.validation);
  c.validation_cache = get<std::string>(t, "diagnostics.validation_cache", c.validation_cache);
  m.global_errors = get_bool(t, "diagnostics.global_errors", m.global_errors);
  m.timings = get_bool(t, "diagnostics.timings", m.timings);
  gr.global_errors = m.global_errors;
  gr.timings = m.timings;
  c.trials = get(t, "diagnostics.trials", c.trials);
  c.out_dir = get<std::string>(t, "output.dir", c.out_dir);
  return c;
}

} // namespace

std::string to_string(Method method) {
  switch (method) {
  case Method::mf:
    return "mf";
  case Method::greedy:
    return "greedy";
  case Method::pod:
    return "pod";
  }
  return "?";
}

RunConfig default_config(Layout problem) {
  RunConfig c;
  c.problem = problem;
  if (problem == Layout::heat2d) {
    c.fine_nodes = 895;
    c.coarse_nodes = 62;
    c.grid.kind = "tensor";
    c.grid.axes = {AxisSpec{AxisKind::log, {0.1, 10.0}, 50}, AxisSpec{AxisKind::uniform, {-1.0, 1.0}, 41}};
    c.grid.n_val = 50;
    c.mf.sketch_size = 2;
    c.mf.points_per_iter = 1;
  } else {
    c.fine_nodes = 3492;
    c.coarse_nodes = 575;
    c.grid.kind = "lhs";
    c.grid.lhs_n = 2500;
    c.grid.lhs_dim = 9;
    c.grid.n_val = 500;
    c.mf.sketch_size = 100;
    c.mf.points_per_iter = 10;
  }
  c.grid.seed = 2024;
  c.mf.seed = 1;
  return c;
}

RunConfig parse_config_text(const std::string &text, bool json) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    if (json)
      pt::read_json(is, tree);
    else
      pt::read_ini(is, tree);
  } catch (const pt::file_parser_error &e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  RunConfig c = from_tree(tree);
  validate(c);
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  RunConfig c = parse_config_text(ss.str(), json);
  c.source = path;
  return c;
}

void validate(const RunConfig &c) {
  auto require = [](bool ok, const std::string &msg) {
    if (!ok)
      throw ConfigError(msg);
  };
  const int d = c.problem == Layout::heat2d ? 2 : 9;
  require(c.fine_nodes >= 9, "problem.fine_nodes must be at least 9");
  require(c.mf.sketch != SketchKind::coarse || c.method != Method::mf || (c.coarse_nodes >= 9 && c.coarse_nodes < c.fine_nodes),
          "problem.coarse_nodes must be at least 9 and below problem.fine_nodes");
  require(c.block_side > 0.0 && c.block_side < 1.0, "problem.block_side must lie in (0, 1)");
  if (c.grid.kind == "tensor") {
    require(static_cast<int>(c.grid.axes.size()) == d,
            "params: " + std::to_string(c.grid.axes.size()) + " axes given, problem needs " + std::to_string(d));
    for (std::size_t k = 0; k < c.grid.axes.size(); ++k) {
      const auto &a = c.grid.axes[k];
      const std::string key = "params.axis" + std::to_string(k + 1);
      require(a.count >= 1, key + ": count must be positive");
      require(a.range.lo <= a.range.hi, key + ": lo exceeds hi");
      require(a.kind != AxisKind::log || a.range.lo * a.range.hi > 0.0,
              key + ": log spacing needs a range of one sign (use symlog)");
    }
  } else if (c.grid.kind == "lhs") {
    require(c.grid.lhs_dim == d, "params.dim must be " + std::to_string(d));
    require(c.grid.lhs_n >= 1, "params.n must be positive");
    require(c.grid.lhs_range.lo < c.grid.lhs_range.hi, "params.lo must be below params.hi");
    require(c.grid.lhs_scale == Scale::linear || c.grid.lhs_range.lo > 0.0, "params.scale = log needs lo > 0");
    if (c.problem == Layout::advdiff9d)
      require(c.grid.lhs_range.lo > 0.0, "params.lo must be positive (diffusion coefficients)");
  } else {
    require(!c.grid.csv_path.empty(), "params.path is required for params.kind = csv");
  }
  require(c.grid.n_val >= 0, "params.n_val must be nonnegative");
  require(c.mf.tol > 0.0, "method.tol must be positive");
  require(c.mf.max_iter >= 1, "method.max_iter must be positive");
  require(c.mf.points_per_iter >= 1, "method.points_per_iter must be positive");
  require(c.mf.sketch_size >= 1, "method.sketch_size must be positive");
  require(c.mf.gs_tol > 0.0 && c.mf.gs_tol < 1.0, "method.gs_tol must lie in (0, 1)");
  require(c.mf.rank_tol > 0.0 && c.mf.rank_tol < 1.0, "method.rank_tol must lie in (0, 1)");
  require(!c.mf.require_val || c.validation, "method.require_val needs diagnostics.validation");
  require(c.method != Method::greedy || c.problem == Layout::heat2d, "method.name = greedy needs the affine heat2d problem");
  require(c.trials >= 2, "diagnostics.trials must be at least 2");
  require(!c.out_dir.empty(), "output.dir must not be empty");
}

std::string describe(const RunConfig &c) {
  std::ostringstream os;
  os << "problem        " << to_string(c.problem) << "\n";
  os << "method         " << to_string(c.method);
  if (c.method == Method::mf)
    os << " (" << to_string(c.mf.sketch) << " sketch" << (c.mf.sketch == SketchKind::random ? ", K = " + std::to_string(c.mf.sketch_size) : "")
       << ", p = " << c.mf.points_per_iter << ")";
  os << "\n";
  os << "fine mesh      ~" << c.fine_nodes << " nodes\n";
  if (c.method == Method::mf && c.mf.sketch == SketchKind::coarse)
    os << "coarse mesh    ~" << c.coarse_nodes << " nodes\n";
  if (c.grid.kind == "tensor") {
    os << "parameters    ";
    for (const auto &a : c.grid.axes)
      os << " " << axis_kind_name(a.kind) << "[" << a.range.lo << ", " << a.range.hi << "] x" << a.count;
    os << "\n";
  } else if (c.grid.kind == "lhs") {
    os << "parameters     lhs n = " << c.grid.lhs_n << " in [" << c.grid.lhs_range.lo << ", " << c.grid.lhs_range.hi
       << "]^" << c.grid.lhs_dim << (c.grid.lhs_scale == Scale::log ? " (log)" : "") << "\n";
  } else {
    os << "parameters     " << c.grid.csv_path << "\n";
  }
  os << "validation     " << c.grid.n_val << " points" << (c.validation ? "" : " (disabled)") << "\n";
  os << "tolerance      " << c.mf.tol << (c.mf.require_val ? " (train and validation)" : "") << "\n";
  os << "max iterations " << c.mf.max_iter << "\n";
  os << "seeds          grid " << c.grid.seed << ", sketch " << c.mf.seed << "\n";
  os << "output         " << c.out_dir << "\n";
  return os.str();
}

} // namespace mfrom
