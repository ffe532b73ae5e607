#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mfrom {

enum class AxisKind { uniform, log, symlog };
enum class Scale { linear, log };
enum class Role { train, validation };

struct Range {
  double lo;
  double hi;
};

// How one dimension of a grid was generated, kept for reports.
struct AxisDescriptor {
  std::string kind;  // "uniform", "log", "symlog", "lhs-linear", "lhs-log"
  Range range;
  int count;
};

// Parameter points (one row each) with a train/validation role per point.
struct ParameterGrid {
  int dim = 0;
  Eigen::MatrixXd points;  // n x dim
  std::vector<Role> roles;
  std::uint64_t seed = 0;
  std::vector<AxisDescriptor> axes;

  int size() const { return static_cast<int>(points.rows()); }
  Eigen::VectorXd point(int i) const { return points.row(i).transpose(); }

  // Indices into `points` with the given role, in ascending order.
  std::vector<int> indices(Role role) const;
  // Points with the given role, in ascending index order.
  Eigen::MatrixXd subset(Role role) const;
  int count(Role role) const;
};

// Sorted, endpoint-inclusive sequence. `log` needs lo, hi of one sign and
// nonzero; `symlog` mirrors a log grid of |x| in [`symlog_floor`, max|lo|,|hi|]
// around zero and is defined for sign-changing ranges.
std::vector<double> grid_1d(AxisKind kind, Range range, int n, double symlog_floor = 1e-2);

// Cartesian product; the last axis varies fastest. All points are train.
ParameterGrid tensor_grid(const std::vector<std::vector<double>> &axes);

// Latin hypercube: each dimension has exactly one sample per stratum of the
// (linear or log) scaled range. All points are train.
ParameterGrid lhs(int dim, int n, const std::vector<Range> &box, std::uint64_t seed,
                  const std::vector<Scale> &scale);

// Marks `n_val` seeded-random points as validation. Throws ConfigError when
// n_val >= grid.size().
ParameterGrid split_train_val(const ParameterGrid &grid, int n_val, std::uint64_t seed);

// CSV: header "role,mu_1,...,mu_d", one row per point.
void write_grid_csv(std::ostream &os, const ParameterGrid &grid);
ParameterGrid read_grid_csv(std::istream &is);

} // namespace mfrom
