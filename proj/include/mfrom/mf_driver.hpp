#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfrom/deim.hpp"
#include "mfrom/linalg.hpp"
#include "mfrom/problem.hpp"

namespace mfrom {

enum class SketchKind { random, coarse };
enum class LofiMode { coarse_snapshots, rom_coefficients };
enum class OrthoOrder { columns, energy };
enum class RunStatus { converged, stalled, max_iter };

std::string to_string(SketchKind kind);
std::string to_string(RunStatus status);

struct MfOptions {
  SketchKind sketch = SketchKind::random;
  int sketch_size = 2;         // K, random sketch only
  int points_per_iter = 1;     // p
  double tol = 1e-6;
  int max_iter = 200;
  std::uint64_t seed = 0;
  bool require_val = false;
  double gs_tol = 1e-10;
  double rank_tol = 1e-12;
  DeimOptions deim;
  HistoryPolicy history = HistoryPolicy::consumed;
  OrthoOrder ortho = OrthoOrder::energy;
  bool normalize = false;      // unit-norm low-fidelity columns before the SVD
  bool global_errors = false;  // eps_ROM / eps_POD over the whole training set
  bool timings = true;         // false writes zero seconds for reproducible output
};

struct LofiModel {
  LofiMode mode = LofiMode::coarse_snapshots;
  Eigen::MatrixXd data;  // m x n_train snapshots or r x n_train coefficients

  int n_train() const { return static_cast<int>(data.cols()); }
};

struct ErrorRow {
  int iteration = 0;
  int n_points = 0;        // high-fidelity snapshots so far
  int rank = 0;
  double eps_train = 0.0;  // new points, ROM before enrichment
  double eps_val = 0.0;    // NaN when no validation set
  double eps_consistency = 0.0;  // all selected points after enrichment
  double eps_rom = 0.0;    // NaN unless global errors are on
  double eps_pod = 0.0;
  double basis_defect = 0.0;  // orthonormality defect after enrichment
  double seconds = 0.0;
  std::vector<int> new_points;
};

// Everything the loop needs besides its own state.
struct MfContext {
  const Problem *fine = nullptr;
  const Problem *coarse = nullptr;   // coarse sketch only
  Eigen::MatrixXd train;             // n_train x d
  Eigen::MatrixXd val;               // n_val x d, may be empty
  Eigen::MatrixXd val_snapshots;     // N x n_val
  Eigen::MatrixXd train_snapshots;   // N x n_train, global errors only
};

struct MfState {
  int iteration = 0;
  DeimState deim;
  ReducedBasis basis;
  Eigen::MatrixXd coefficients;   // r x n_train, ROM over the training set
  Eigen::MatrixXd snapshots;      // N x |selected|, aligned with deim.selected
  LofiModel lofi;
  std::vector<ErrorRow> history;
  std::vector<Eigen::VectorXd> lofi_sigma;  // singular values seen per iteration
  std::uint64_t seed = 0;
  bool stalled = false;
};

struct MfReport {
  RunStatus status = RunStatus::max_iter;
  MfState state;
  MfOptions options;
};

// Coarse full-order solves at every training parameter.
LofiModel init_lofi_coarse(const Problem &coarse, const Eigen::MatrixXd &train);

// Draws K training points (seeded, without replacement), solves them at high
// fidelity and seeds the basis and the ROM-coefficient model. Draws whose
// snapshot is linearly dependent on earlier ones are replaced.
MfState init_lofi_random(const MfContext &ctx, const MfOptions &opts);

struct ParametricModes {
  Eigen::MatrixXd modes;   // n_train x k
  Eigen::VectorXd sigma;
  Eigen::MatrixXd rotation;  // left factor applied to the basis in coefficient mode
};

// Right singular vectors of the low-fidelity data above rank_tol. With
// `normalize`, every nonzero column is scaled to unit norm first so that the
// modes follow relative rather than absolute variation. Throws
// NumericalError when the data is zero.
ParametricModes parametric_modes(const LofiModel &lofi, double rank_tol = 1e-12, bool normalize = false);

// One pass of the loop: modes, history orthogonalization, DEIM, high-fidelity
// enrichment, ROM over the training set, low-fidelity update, errors.
MfState mf_step(const MfContext &ctx, MfState state, const MfOptions &opts);

// ROM coefficients for every row of `params`.
Eigen::MatrixXd rom_coefficients(const Problem &problem, const ReducedBasis &basis, const Eigen::MatrixXd &params);

// max over selected points of |u_HF - Phi b| / |u_HF| with the current ROM
// coefficients. Right after enrichment this only measures Galerkin
// consistency, so the stopping test uses predicted_error instead.
double error_train(const MfState &state);

// max over `points` of the relative error between their snapshots (columns of
// `snapshots`) and the current ROM, evaluated before those snapshots enter
// the basis. An empty basis gives 1; NaN when every snapshot is zero.
double predicted_error(const MfState &state, const std::vector<int> &points, const Eigen::MatrixXd &snapshots);

// Throws ConfigError when validation snapshots are missing; NaN for an empty
// validation set.
double error_val(const MfContext &ctx, const ReducedBasis &basis);

// Root-sum-square errors over the training set. Require ctx.train_snapshots.
double error_rom_global(const MfContext &ctx, const MfState &state);
double error_pod_global(const MfContext &ctx, const ReducedBasis &basis);

MfState init_state(const MfContext &ctx, const MfOptions &opts);
MfReport run(const MfContext &ctx, const MfOptions &opts);

} // namespace mfrom
