#include "mfrom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mfrom/errors.hpp"

namespace mfrom {

namespace {

using Triplet = Eigen::Triplet<double>;

struct P1Geometry {
  double area;
  Eigen::Matrix<double, 3, 2> grad;
};

P1Geometry p1_geometry(const Mesh &mesh, int t) {
  const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Eigen::Vector2d &p1 = mesh.nodes[tri[0]], &p2 = mesh.nodes[tri[1]], &p3 = mesh.nodes[tri[2]];
  P1Geometry g;
  g.area = mesh.area(t);
  const double two_a = 2.0 * g.area;
  g.grad << p2.y() - p3.y(), p3.x() - p2.x(),
            p3.y() - p1.y(), p1.x() - p3.x(),
            p1.y() - p2.y(), p2.x() - p1.x();
  g.grad /= two_a;
  return g;
}

std::string format_mu(const Eigen::VectorXd &mu) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    os << (i ? ", " : "") << mu[i];
  os << ')';
  return os.str();
}

// Element stiffness on the free dofs, restricted to triangles accepted by `keep`.
template <class Keep>
SparseMatrix stiffness(const Mesh &mesh, const DofMap &dofs, Keep keep) {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double weight = keep(t);
    if (weight == 0.0)
      continue;
    const P1Geometry g = p1_geometry(mesh, t);
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      const int di = dofs.node_to_dof[static_cast<std::size_t>(tri[i])];
      if (di < 0)
        continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = dofs.node_to_dof[static_cast<std::size_t>(tri[j])];
        if (dj < 0)
          continue;
        trips.emplace_back(di, dj, weight * g.area * g.grad.row(i).dot(g.grad.row(j)));
      }
    }
  }
  SparseMatrix K(dofs.num_dofs(), dofs.num_dofs());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::VectorXd edge_load(const Mesh &mesh, const DofMap &dofs, BoundaryTag tag) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dofs.num_dofs());
  bool found = false;
  for (const auto &e : mesh.boundary_edges) {
    if (e.tag != tag)
      continue;
    found = true;
    const double len = (mesh.nodes[e.nodes[0]] - mesh.nodes[e.nodes[1]]).norm();
    for (int v : e.nodes) {
      const int d = dofs.node_to_dof[static_cast<std::size_t>(v)];
      if (d >= 0)
        f[d] += 0.5 * len;
    }
  }
  if (!found)
    throw AssemblyError("no boundary edges tagged '" + to_string(tag) + "'");
  return f;
}

void require_tag(const Mesh &mesh, BoundaryTag tag) {
  const bool found = std::any_of(mesh.boundary_edges.begin(), mesh.boundary_edges.end(),
                                 [tag](const BoundaryEdge &e) { return e.tag == tag; });
  if (!found)
    throw AssemblyError("mesh is missing boundary tag '" + to_string(tag) + "'");
}

} // namespace

Eigen::VectorXd DofMap::to_nodal(const Eigen::VectorXd &free, double dirichlet_value) const {
  Eigen::VectorXd nodal = Eigen::VectorXd::Constant(num_nodes(), dirichlet_value);
  for (int d = 0; d < num_dofs(); ++d)
    nodal[dof_to_node[static_cast<std::size_t>(d)]] = free[d];
  return nodal;
}

Eigen::VectorXd DofMap::to_free(const Eigen::VectorXd &nodal) const {
  Eigen::VectorXd free(num_dofs());
  for (int d = 0; d < num_dofs(); ++d)
    free[d] = nodal[dof_to_node[static_cast<std::size_t>(d)]];
  return free;
}

DofMap make_dof_map(const Mesh &mesh, std::uint8_t dirichlet_mask) {
  DofMap dofs;
  dofs.node_to_dof.assign(static_cast<std::size_t>(mesh.num_nodes()), -1);
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    if ((mesh.node_tags[static_cast<std::size_t>(v)] & dirichlet_mask) != 0)
      continue;
    dofs.node_to_dof[static_cast<std::size_t>(v)] = static_cast<int>(dofs.dof_to_node.size());
    dofs.dof_to_node.push_back(v);
  }
  return dofs;
}

Eigen::VectorXd AffineSystem::theta_all(const Eigen::VectorXd &mu) const {
  const Eigen::VectorXd a = theta.lhs(mu), b = theta.rhs(mu);
  Eigen::VectorXd all(a.size() + b.size());
  all << a, b;
  return all;
}

SparseMatrix AffineSystem::operator_at(const Eigen::VectorXd &mu) const {
  const Eigen::VectorXd th = theta.lhs(mu);
  SparseMatrix A = th[0] * lhs[0].value;
  for (std::size_t q = 1; q < lhs.size(); ++q)
    A += th[static_cast<Eigen::Index>(q)] * lhs[q].value;
  return A;
}

Eigen::VectorXd AffineSystem::rhs_at(const Eigen::VectorXd &mu) const {
  const Eigen::VectorXd th = theta.rhs(mu);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(dim());
  for (std::size_t q = 0; q < rhs.size(); ++q)
    f += th[static_cast<Eigen::Index>(q)] * rhs[q].value;
  return f;
}

void AffineSystem::validate() const {
  if (lhs.empty() || rhs.empty())
    throw AssemblyError("affine system needs at least one LHS and one RHS term");
  std::unordered_set<std::string> tags;
  for (const auto &t : lhs) {
    if (t.value.rows() != dim() || t.value.cols() != dim())
      throw AssemblyError("affine LHS term '" + t.tag + "' has the wrong dimension");
    if (!tags.insert(t.tag).second)
      throw AssemblyError("duplicate affine tag '" + t.tag + "'");
  }
  for (const auto &t : rhs) {
    if (t.value.size() != dim())
      throw AssemblyError("affine RHS term '" + t.tag + "' has the wrong dimension");
    if (!tags.insert(t.tag).second)
      throw AssemblyError("duplicate affine tag '" + t.tag + "'");
  }
}

Eigen::VectorXd solve_sparse(const SparseMatrix &A, const Eigen::VectorXd &f, bool symmetric,
                             const std::string &context) {
  const double fnorm = f.norm();
  if (fnorm == 0.0)
    return Eigen::VectorXd::Zero(f.size());
  Eigen::VectorXd u;
  if (symmetric) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw SolverError("sparse LDL^T factorization failed " + context);
    u = ldlt.solve(f);
  } else {
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("sparse LU factorization failed " + context + ": " + lu.lastErrorMessage());
    u = lu.solve(f);
  }
  const double res = (A * u - f).norm();
  if (!u.allFinite() || !(res <= 1e-10 * fnorm))
    throw SolverError("singular system " + context + " (relative residual " +
                      std::to_string(res / fnorm) + ")");
  return u;
}

// --- heat ------------------------------------------------------------------

AffineSystem assemble_heat_affine(const Mesh &mesh) {
  if (mesh.layout != Layout::heat2d)
    throw AssemblyError("assemble_heat_affine: mesh does not have the heat2d layout");
  require_tag(mesh, BoundaryTag::top);
  require_tag(mesh, BoundaryTag::base);
  require_tag(mesh, BoundaryTag::side);

  AffineSystem sys;
  sys.dofs = make_dof_map(mesh, static_cast<std::uint8_t>(BoundaryTag::top));
  sys.symmetric = true;
  const auto in_block = [&mesh](int label) {
    return [&mesh, label](int t) { return mesh.subdomain[static_cast<std::size_t>(t)] == label ? 1.0 : 0.0; };
  };
  sys.lhs.push_back({"stiffness_omega1", stiffness(mesh, sys.dofs, in_block(1))});
  sys.lhs.push_back({"stiffness_omega0", stiffness(mesh, sys.dofs, in_block(0))});
  sys.rhs.push_back({"flux_base", edge_load(mesh, sys.dofs, BoundaryTag::base)});
  sys.theta.param_dim = 2;
  sys.theta.lhs = [](const Eigen::VectorXd &mu) {
    Eigen::VectorXd th(2);
    th << 1.0, mu[0];
    return th;
  };
  sys.theta.rhs = [](const Eigen::VectorXd &mu) {
    Eigen::VectorXd th(1);
    th << mu[1];
    return th;
  };
  sys.validate();
  return sys;
}

std::pair<SparseMatrix, Eigen::VectorXd> assemble_heat_full(const Mesh &mesh, const Eigen::VectorXd &mu) {
  const DofMap dofs = make_dof_map(mesh, static_cast<std::uint8_t>(BoundaryTag::top));
  SparseMatrix A = stiffness(mesh, dofs, [&](int t) {
    return mesh.subdomain[static_cast<std::size_t>(t)] == 0 ? mu[0] : 1.0;
  });
  Eigen::VectorXd f = mu[1] * edge_load(mesh, dofs, BoundaryTag::base);
  return {std::move(A), std::move(f)};
}

SparseMatrix assemble_laplacian(const Mesh &mesh, const DofMap &dofs) {
  return stiffness(mesh, dofs, [](int) { return 1.0; });
}

FomSolution solve_fom(const AffineSystem &system, const Eigen::VectorXd &mu) {
  if (mu.size() != system.theta.param_dim)
    throw DomainError("solve_fom: parameter has dimension " + std::to_string(mu.size()) +
                      ", expected " + std::to_string(system.theta.param_dim));
  FomSolution sol;
  sol.mu = mu;
  sol.free = solve_sparse(system.operator_at(mu), system.rhs_at(mu), system.symmetric,
                          "at mu = " + format_mu(mu));
  sol.nodal = system.dofs.to_nodal(sol.free);
  return sol;
}

// --- potential flow --------------------------------------------------------

BlockValues default_permeability() {
  BlockValues k;
  k.fill(1.0);
  k[4] = 1e-2;
  return k;
}

BlockValues default_source() {
  BlockValues s{};
  s[4] = 1.0;
  return s;
}

double VelocityField::max_speed() const {
  return speed.empty() ? 0.0 : *std::max_element(speed.begin(), speed.end());
}

VelocityField solve_potential_flow(const Mesh &mesh, const BlockValues &permeability,
                                   const PotentialFlowOptions &opts) {
  if (mesh.layout != Layout::advdiff9d)
    throw AssemblyError("solve_potential_flow: mesh does not have the advdiff9d layout");
  require_tag(mesh, BoundaryTag::inlet);
  require_tag(mesh, BoundaryTag::outlet);
  require_tag(mesh, BoundaryTag::wall);
  for (double k : permeability)
    if (!(k > 0.0))
      throw DomainError("solve_potential_flow: permeability must be positive");

  // phi = 0 on the outlet pins the otherwise pure-Neumann problem.
  const DofMap dofs = make_dof_map(mesh, static_cast<std::uint8_t>(BoundaryTag::outlet));
  const auto kappa = [&](int t) {
    return permeability[static_cast<std::size_t>(mesh.subdomain[static_cast<std::size_t>(t)] - 1)];
  };
  const SparseMatrix K = stiffness(mesh, dofs, kappa);
  const Eigen::VectorXd f = opts.inlet_flux * edge_load(mesh, dofs, BoundaryTag::inlet);
  const Eigen::VectorXd phi = solve_sparse(K, f, true, "in the potential flow problem");

  VelocityField field;
  field.potential = dofs.to_nodal(phi);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const P1Geometry g = p1_geometry(mesh, t);
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    Eigen::Vector2d grad_phi = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i)
      grad_phi += field.potential[tri[i]] * g.grad.row(i).transpose();
    const Eigen::Vector2d b = -kappa(t) * grad_phi;
    field.velocity.push_back(b);
    field.speed.push_back(b.norm());
  }
  return field;
}

Eigen::VectorXd weak_divergence(const Mesh &mesh, const VelocityField &field) {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const P1Geometry g = p1_geometry(mesh, t);
    const auto &tri = mesh.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      div[tri[i]] += g.area * g.grad.row(i).dot(field.velocity[static_cast<std::size_t>(t)]);
  }
  return div;
}

double divergence_residual(const Mesh &mesh, const VelocityField &field) {
  const Eigen::VectorXd div = weak_divergence(mesh, field);
  double worst = 0.0;
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    if (mesh.has_tag(v, BoundaryTag::inlet) || mesh.has_tag(v, BoundaryTag::outlet))
      continue;
    worst = std::max(worst, std::abs(div[v]));
  }
  return worst;
}

// --- SUPG ------------------------------------------------------------------

double supg_beta(double peclet) {
  const double pe = std::abs(peclet);
  if (pe < 1e-3)
    return pe / 3.0 - pe * pe * pe / 45.0;
  if (pe > 30.0)
    return 1.0 - 1.0 / pe;  // coth(pe) == 1 to double precision
  return 1.0 / std::tanh(pe) - 1.0 / pe;
}

AdvDiffModel::AdvDiffModel(Mesh mesh, VelocityField field, BlockValues source)
    : mesh_(std::move(mesh)), field_(std::move(field)), source_(source) {
  if (mesh_.layout != Layout::advdiff9d)
    throw AssemblyError("AdvDiffModel: mesh does not have the advdiff9d layout");
  require_tag(mesh_, BoundaryTag::inlet);
  if (field_.velocity.size() != static_cast<std::size_t>(mesh_.num_triangles()))
    throw AssemblyError("AdvDiffModel: velocity field does not match the mesh");
  dofs_ = make_dof_map(mesh_, static_cast<std::uint8_t>(BoundaryTag::inlet));

  std::vector<Triplet> trips;
  elements_.reserve(static_cast<std::size_t>(mesh_.num_triangles()));
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    const P1Geometry g = p1_geometry(mesh_, t);
    Element e;
    e.area = g.area;
    e.grad = g.grad;
    const Eigen::Vector2d &b = field_.velocity[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      e.stream[static_cast<std::size_t>(i)] = g.grad.row(i).dot(b);
    e.speed = field_.speed[static_cast<std::size_t>(t)];
    e.h = mesh_.h_elem[static_cast<std::size_t>(t)];
    e.block = mesh_.subdomain[static_cast<std::size_t>(t)] - 1;
    const auto &tri = mesh_.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      e.dof[static_cast<std::size_t>(i)] = dofs_.node_to_dof[static_cast<std::size_t>(tri[i])];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (e.dof[i] >= 0 && e.dof[j] >= 0)
          trips.emplace_back(e.dof[i], e.dof[j], 1.0);
    elements_.push_back(e);
  }
  pattern_.resize(dim(), dim());
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  // Locate each element entry in the compressed value array.
  const int *outer = pattern_.outerIndexPtr();
  const int *inner = pattern_.innerIndexPtr();
  for (auto &e : elements_) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        int &slot = e.slot[static_cast<std::size_t>(3 * i + j)];
        slot = -1;
        if (e.dof[i] < 0 || e.dof[j] < 0)
          continue;
        // Column-major: column j, row i.
        const int *begin = inner + outer[e.dof[j]], *end = inner + outer[e.dof[j] + 1];
        slot = static_cast<int>(std::lower_bound(begin, end, e.dof[i]) - inner);
      }
    }
  }
}

void AdvDiffModel::check_mu(const Eigen::VectorXd &mu) const {
  if (mu.size() != 9)
    throw DomainError("advdiff9d: expected 9 diffusivities, got " + std::to_string(mu.size()));
  for (Eigen::Index i = 0; i < 9; ++i)
    if (!(mu[i] > 0.0))
      throw DomainError("advdiff9d: diffusivity of block " + std::to_string(i + 1) +
                        " must be positive, got " + std::to_string(mu[i]));
}

std::vector<double> AdvDiffModel::tau(const Eigen::VectorXd &mu) const {
  check_mu(mu);
  std::vector<double> out;
  out.reserve(elements_.size());
  for (const auto &e : elements_) {
    if (e.speed <= 0.0) {
      out.push_back(0.0);
      continue;
    }
    const double pe = e.speed * e.h / (2.0 * mu[e.block]);
    out.push_back(supg_beta(pe) * e.h / (2.0 * e.speed));
  }
  return out;
}

LinearSystem AdvDiffModel::assemble(const Eigen::VectorXd &mu) const {
  const std::vector<double> taus = tau(mu);
  LinearSystem sys{pattern_, Eigen::VectorXd::Zero(dim())};
  double *val = sys.A.valuePtr();
  std::fill(val, val + sys.A.nonZeros(), 0.0);
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    const Element &e = elements_[k];
    const double kdiff = mu[e.block];
    const double t = taus[k];
    const double sigma = source_[static_cast<std::size_t>(e.block)];
    for (int i = 0; i < 3; ++i) {
      if (e.dof[i] < 0)
        continue;
      const double si = e.stream[static_cast<std::size_t>(i)];
      for (int j = 0; j < 3; ++j) {
        if (e.dof[j] < 0)
          continue;
        const double sj = e.stream[static_cast<std::size_t>(j)];
        val[e.slot[static_cast<std::size_t>(3 * i + j)]] +=
            e.area * (kdiff * e.grad.row(i).dot(e.grad.row(j)) + sj / 3.0 + t * si * sj);
      }
      // Source moved to the right-hand side: A u = -(v + tau b.grad v, sigma).
      if (sigma != 0.0)
        sys.f[e.dof[i]] -= sigma * e.area * (1.0 / 3.0 + t * si);
    }
  }
  return sys;
}

FomSolution AdvDiffModel::solve(const Eigen::VectorXd &mu) const {
  const LinearSystem sys = assemble(mu);
  FomSolution sol;
  sol.mu = mu;
  sol.free = solve_sparse(sys.A, sys.f, false, "at mu = " + format_mu(mu));
  sol.nodal = dofs_.to_nodal(sol.free);
  return sol;
}

AdvDiffModel make_advdiff_model(const Mesh &mesh, const BlockValues &permeability, const BlockValues &source) {
  VelocityField field = solve_potential_flow(mesh, permeability);
  return AdvDiffModel(mesh, std::move(field), source);
}

} // namespace mfrom
