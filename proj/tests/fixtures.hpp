#pragma once

#include <memory>

#include "mfrom/mf_driver.hpp"
#include "mfrom/param_space.hpp"
#include "mfrom/problem.hpp"

namespace fixtures {

// Small heat setup: 8x8 fine mesh, 4x4 coarse mesh, 12 x 5 training grid and
// a handful of validation points off the grid.
struct SmallHeat {
  std::unique_ptr<mfrom::Problem> fine;
  std::unique_ptr<mfrom::Problem> coarse;
  mfrom::MfContext ctx;

  explicit SmallHeat(bool with_train_snapshots = false) {
    using namespace mfrom;
    fine = make_problem(Layout::heat2d, build_unit_square_mesh(8, 8, Layout::heat2d));
    coarse = make_problem(Layout::heat2d, build_unit_square_mesh(4, 4, Layout::heat2d));
    const ParameterGrid g =
        tensor_grid({grid_1d(AxisKind::log, {0.1, 10}, 12), grid_1d(AxisKind::uniform, {-1, 1}, 5)});
    ctx.fine = fine.get();
    ctx.coarse = coarse.get();
    ctx.train = g.points;
    ctx.val.resize(4, 2);
    ctx.val << 0.15, 0.3, 0.8, -0.7, 2.5, 0.9, 7.0, -0.2;
    ctx.val_snapshots = solve_all(*fine, ctx.val);
    if (with_train_snapshots)
      ctx.train_snapshots = solve_all(*fine, ctx.train);
  }
};

} // namespace fixtures
