#include "mfrom/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mfrom/errors.hpp"
#include "mfrom/rng.hpp"

namespace mfrom {

std::vector<int> ParameterGrid::indices(Role role) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (roles[static_cast<std::size_t>(i)] == role)
      out.push_back(i);
  return out;
}

Eigen::MatrixXd ParameterGrid::subset(Role role) const {
  const std::vector<int> idx = indices(role);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), dim);
  for (std::size_t k = 0; k < idx.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = points.row(idx[k]);
  return out;
}

int ParameterGrid::count(Role role) const {
  return static_cast<int>(indices(role).size());
}

std::vector<double> grid_1d(AxisKind kind, Range range, int n, double symlog_floor) {
  if (n < 2)
    throw ConfigError("grid_1d: need at least 2 points");
  if (!(range.lo < range.hi))
    throw ConfigError("grid_1d: range must satisfy lo < hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  switch (kind) {
  case AxisKind::uniform:
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = range.lo + (range.hi - range.lo) * i / (n - 1);
    break;
  case AxisKind::log: {
    if (range.lo * range.hi <= 0.0)
      throw ConfigError("grid_1d: log spacing needs lo and hi of the same sign and nonzero; use "
                        "symlog for sign-changing ranges");
    const double sign = range.lo > 0 ? 1.0 : -1.0;
    const double a = std::log(sign * range.lo), b = std::log(sign * range.hi);
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = sign * std::exp(a + (b - a) * i / (n - 1));
    out.front() = range.lo;
    out.back() = range.hi;
    if (sign < 0)
      std::sort(out.begin(), out.end());
    break;
  }
  case AxisKind::symlog: {
    if (!(symlog_floor > 0.0))
      throw ConfigError("grid_1d: symlog floor must be positive");
    // Geometric spacing in |x| on each side of zero, proportional to each
    // side's share of the points.
    const double neg = range.lo < 0 ? -range.lo : 0.0, pos = range.hi > 0 ? range.hi : 0.0;
    if (range.lo >= 0 || range.hi <= 0)
      return grid_1d(AxisKind::log, range, n);
    const int n_neg = std::max(1, static_cast<int>(std::lround(n * std::log(neg / symlog_floor + 1.0) /
                                                               (std::log(neg / symlog_floor + 1.0) +
                                                                std::log(pos / symlog_floor + 1.0)))));
    const int n_pos = n - n_neg;
    if (n_pos < 1 || neg <= symlog_floor || pos <= symlog_floor)
      throw ConfigError("grid_1d: symlog range too small for the floor");
    std::vector<double> left = n_neg >= 2 ? grid_1d(AxisKind::log, {symlog_floor, neg}, n_neg)
                                          : std::vector<double>{neg};
    std::vector<double> right = n_pos >= 2 ? grid_1d(AxisKind::log, {symlog_floor, pos}, n_pos)
                                           : std::vector<double>{pos};
    std::size_t k = 0;
    for (auto it = left.rbegin(); it != left.rend(); ++it)
      out[k++] = -*it;
    for (double v : right)
      out[k++] = v;
    break;
  }
  }
  return out;
}

ParameterGrid tensor_grid(const std::vector<std::vector<double>> &axes) {
  if (axes.empty())
    throw ConfigError("tensor_grid: no axes");
  std::size_t total = 1;
  for (const auto &a : axes) {
    if (a.empty())
      throw ConfigError("tensor_grid: empty axis");
    if (total > static_cast<std::size_t>(std::numeric_limits<int>::max()) / a.size())
      throw ConfigError("tensor_grid: point count overflows");
    total *= a.size();
  }
  ParameterGrid grid;
  grid.dim = static_cast<int>(axes.size());
  grid.points.resize(static_cast<Eigen::Index>(total), grid.dim);
  grid.roles.assign(total, Role::train);
  for (const auto &a : axes)
    grid.axes.push_back({"tensor", {a.front(), a.back()}, static_cast<int>(a.size())});
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rem = p;
    for (int d = grid.dim - 1; d >= 0; --d) {
      const auto &a = axes[static_cast<std::size_t>(d)];
      grid.points(static_cast<Eigen::Index>(p), d) = a[rem % a.size()];
      rem /= a.size();
    }
  }
  return grid;
}

ParameterGrid lhs(int dim, int n, const std::vector<Range> &box, std::uint64_t seed,
                  const std::vector<Scale> &scale) {
  if (n < 1 || dim < 1)
    throw ConfigError("lhs: need n >= 1 and dim >= 1");
  if (box.size() != static_cast<std::size_t>(dim) || scale.size() != static_cast<std::size_t>(dim))
    throw ConfigError("lhs: box and scale must have one entry per dimension");
  for (int d = 0; d < dim; ++d) {
    const Range r = box[static_cast<std::size_t>(d)];
    if (!(r.lo < r.hi))
      throw ConfigError("lhs: range must satisfy lo < hi");
    if (scale[static_cast<std::size_t>(d)] == Scale::log && !(r.lo > 0.0))
      throw ConfigError("lhs: log scale needs a positive range");
  }
  ParameterGrid grid;
  grid.dim = dim;
  grid.seed = seed;
  grid.points.resize(n, dim);
  grid.roles.assign(static_cast<std::size_t>(n), Role::train);
  Rng rng(seed);
  for (int d = 0; d < dim; ++d) {
    const Range r = box[static_cast<std::size_t>(d)];
    const bool is_log = scale[static_cast<std::size_t>(d)] == Scale::log;
    grid.axes.push_back({is_log ? "lhs-log" : "lhs-linear", r, n});
    const std::vector<int> strata = rng.permutation(n);
    for (int i = 0; i < n; ++i) {
      const double t = (strata[static_cast<std::size_t>(i)] + rng.uniform()) / n;
      grid.points(i, d) = is_log ? r.lo * std::pow(r.hi / r.lo, t) : r.lo + (r.hi - r.lo) * t;
    }
  }
  return grid;
}

ParameterGrid split_train_val(const ParameterGrid &grid, int n_val, std::uint64_t seed) {
  if (n_val < 0 || n_val >= grid.size())
    throw ConfigError("split_train_val: n_val must satisfy 0 <= n_val < " + std::to_string(grid.size()) +
                      ", got " + std::to_string(n_val));
  ParameterGrid out = grid;
  out.roles.assign(static_cast<std::size_t>(grid.size()), Role::train);
  Rng rng(seed);
  for (int i : rng.sample_without_replacement(grid.size(), n_val))
    out.roles[static_cast<std::size_t>(i)] = Role::validation;
  return out;
}

void write_grid_csv(std::ostream &os, const ParameterGrid &grid) {
  os << "role";
  for (int d = 0; d < grid.dim; ++d)
    os << ",mu_" << d + 1;
  os << '\n';
  std::ostringstream line;
  line.precision(17);
  for (int i = 0; i < grid.size(); ++i) {
    line.str("");
    line << (grid.roles[static_cast<std::size_t>(i)] == Role::train ? "train" : "validation");
    for (int d = 0; d < grid.dim; ++d)
      line << ',' << grid.points(i, d);
    os << line.str() << '\n';
  }
}

ParameterGrid read_grid_csv(std::istream &is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("role", 0) != 0)
    throw ConfigError("read_grid_csv: missing 'role,mu_1,...' header");
  ParameterGrid grid;
  grid.dim = static_cast<int>(std::count(header.begin(), header.end(), ','));
  if (grid.dim < 1)
    throw ConfigError("read_grid_csv: no parameter columns");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell == "train")
      grid.roles.push_back(Role::train);
    else if (cell == "validation")
      grid.roles.push_back(Role::validation);
    else
      throw ConfigError("read_grid_csv: unknown role '" + cell + "'");
    std::vector<double> row;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    if (row.size() != static_cast<std::size_t>(grid.dim))
      throw ConfigError("read_grid_csv: row with wrong column count");
    rows.push_back(std::move(row));
  }
  grid.points.resize(static_cast<Eigen::Index>(rows.size()), grid.dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int d = 0; d < grid.dim; ++d)
      grid.points(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
  return grid;
}

} // namespace mfrom
