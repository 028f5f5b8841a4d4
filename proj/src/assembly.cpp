#include "icevp/assembly.hpp"

#include <cmath>

namespace icevp {

namespace {

constexpr double kThird = 1.0 / 3.0;

void require_same_mesh(const TriMesh& mesh, const DofVector& u) {
  if (u.mesh().get() != &mesh)
    throw ConfigError("dof vector does not belong to this mesh");
}

// Symmetric gradient of the scalar hat function with gradient g placed in
// component c of the velocity.
SymTensor2 basis_sym_grad(Vec2 g, int c) {
  if (c == 0) return {g.x, 0.5 * g.y, 0.0};
  return {0.0, 0.5 * g.x, g.y};
}

double strength_at_centroid(const std::vector<double>& P_nodal,
                            const std::array<int, 3>& tri) {
  return (P_nodal[static_cast<std::size_t>(tri[0])] +
          P_nodal[static_cast<std::size_t>(tri[1])] +
          P_nodal[static_cast<std::size_t>(tri[2])]) *
         kThird;
}

}  // namespace

void SparseMatrix::add(int row, int col, double value) {
  if (finalized_) throw ConfigError("sparse matrix: add after finalize");
  if (row < 0 || row >= n_ || col < 0 || col >= n_)
    throw ConfigError("sparse matrix: index out of range");
  triplets_.emplace_back(row, col, value);
}

void SparseMatrix::finalize() {
  if (finalized_) throw ConfigError("sparse matrix: finalized twice");
  mat_.resize(n_, n_);
  mat_.setFromTriplets(triplets_.begin(), triplets_.end());
  mat_.makeCompressed();
  triplets_.clear();
  triplets_.shrink_to_fit();
  finalized_ = true;
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
  if (!finalized_) throw ConfigError("sparse matrix: multiply before finalize");
  if (static_cast<int>(x.size()) != n_)
    throw ConfigError("sparse matrix: dimension mismatch in multiply");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n_);
  Eigen::VectorXd yv = mat_ * xv;
  return std::vector<double>(yv.data(), yv.data() + n_);
}

double SparseMatrix::coeff(int row, int col) const {
  if (!finalized_) throw ConfigError("sparse matrix: coeff before finalize");
  if (row < 0 || row >= n_ || col < 0 || col >= n_)
    throw ConfigError("sparse matrix: index out of range");
  return mat_.coeff(row, col);
}

const Eigen::SparseMatrix<double, Eigen::RowMajor>& SparseMatrix::csr() const {
  if (!finalized_) throw ConfigError("sparse matrix: csr before finalize");
  return mat_;
}

std::vector<double> OperatorParts::total() const {
  std::vector<double> out(a_part.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a_part[i] + c_part[i] + g_part[i];
  return out;
}

OperatorParts apply_operator_parts(const TriMesh& mesh, const DofVector& u,
                                   double t, const IceStrengthField& strength,
                                   const OceanForcing& ocean,
                                   const PhysParams& phys,
                                   const RheologyParams& params) {
  require_same_mesh(mesh, u);
  const int n = mesh.n_dofs();
  OperatorParts parts;
  parts.a_part.assign(static_cast<std::size_t>(n), 0.0);
  parts.c_part.assign(static_cast<std::size_t>(n), 0.0);
  parts.g_part.assign(static_cast<std::size_t>(n), 0.0);

  const auto P_nodal = strength.P.eval_all(t, mesh.n_vertices());
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const SymTensor2 du = element_sym_gradient(mesh, u, e);
    const SymTensor2 s = sigma(strength_at_centroid(P_nodal, tri), du, params);
    for (int k = 0; k < 3; ++k) {
      const int d = mesh.vertex_dof[static_cast<std::size_t>(
          tri[static_cast<std::size_t>(k)])];
      if (d < 0) continue;
      const Vec2 g = geo.grad[static_cast<std::size_t>(k)];
      parts.a_part[static_cast<std::size_t>(2 * d)] +=
          geo.area * (s.xx * g.x + s.xy * g.y);
      parts.a_part[static_cast<std::size_t>(2 * d + 1)] +=
          geo.area * (s.xy * g.x + s.yy * g.y);
    }
  }

  const auto w = lumped_mass(mesh);
  const auto U_nodal = ocean.U.eval_all(t, mesh.n_vertices());
  const double m_omega = phys.m * phys.omega;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = mesh.vertex_dof[static_cast<std::size_t>(v)];
    if (d < 0) continue;
    const double wv = w[static_cast<std::size_t>(v)];
    const Vec2 uv = u.at_vertex(v);
    // c(u, phi) = -int m omega perp(u) . phi
    const Vec2 up = perp(uv);
    parts.c_part[static_cast<std::size_t>(2 * d)] += -wv * m_omega * up.x;
    parts.c_part[static_cast<std::size_t>(2 * d + 1)] += -wv * m_omega * up.y;
    // g(u, phi) = -int tau(u) . phi
    const Vec2 tau = ocean_drag_pointwise(U_nodal[static_cast<std::size_t>(v)],
                                          uv, ocean.c_ocean, ocean.theta);
    parts.g_part[static_cast<std::size_t>(2 * d)] += -wv * tau.x;
    parts.g_part[static_cast<std::size_t>(2 * d + 1)] += -wv * tau.y;
  }
  return parts;
}

std::vector<double> apply_operator(const TriMesh& mesh, const DofVector& u,
                                   double t, const IceStrengthField& strength,
                                   const OceanForcing& ocean,
                                   const PhysParams& phys,
                                   const RheologyParams& params) {
  return apply_operator_parts(mesh, u, t, strength, ocean, phys, params)
      .total();
}

double pairing(const std::vector<double>& r, const std::vector<double>& v) {
  if (r.size() != v.size())
    throw ConfigError("pairing: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * v[i];
  return s;
}

double pairing(const std::vector<double>& r, const DofVector& v) {
  return pairing(r, v.data());
}

std::vector<double> lumped_load_vector(const TriMesh& mesh,
                                       const std::vector<Vec2>& nodal) {
  if (static_cast<int>(nodal.size()) != mesh.n_vertices())
    throw ConfigError("load vector: nodal field does not match the mesh");
  const auto w = lumped_mass(mesh);
  std::vector<double> out(static_cast<std::size_t>(mesh.n_dofs()), 0.0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = mesh.vertex_dof[static_cast<std::size_t>(v)];
    if (d < 0) continue;
    out[static_cast<std::size_t>(2 * d)] =
        w[static_cast<std::size_t>(v)] * nodal[static_cast<std::size_t>(v)].x;
    out[static_cast<std::size_t>(2 * d + 1)] =
        w[static_cast<std::size_t>(v)] * nodal[static_cast<std::size_t>(v)].y;
  }
  return out;
}

std::vector<double> pressure_load_vector(const TriMesh& mesh,
                                         const std::vector<double>& P_nodal) {
  if (static_cast<int>(P_nodal.size()) != mesh.n_vertices())
    throw ConfigError("pressure load: nodal field does not match the mesh");
  std::vector<double> out(static_cast<std::size_t>(mesh.n_dofs()), 0.0);
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const double half_p = 0.5 * strength_at_centroid(P_nodal, tri);
    for (int k = 0; k < 3; ++k) {
      const int d = mesh.vertex_dof[static_cast<std::size_t>(
          tri[static_cast<std::size_t>(k)])];
      if (d < 0) continue;
      const Vec2 g = geo.grad[static_cast<std::size_t>(k)];
      // div of the basis field in component c is the c-th gradient entry.
      out[static_cast<std::size_t>(2 * d)] += half_p * g.x * geo.area;
      out[static_cast<std::size_t>(2 * d + 1)] += half_p * g.y * geo.area;
    }
  }
  return out;
}

namespace {

void append_stiffness(SparseMatrix& A, double* a_energy, const TriMesh& mesh,
                      const DofVector& u_lag,
                      const std::vector<double>& P_nodal,
                      const RheologyParams& params) {
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const SymTensor2 du = element_sym_gradient(mesh, u_lag, e);
    const double pc = strength_at_centroid(P_nodal, tri);
    const double delta = delta_reg(du, params);
    if (delta == 0.0)
      throw ConfigError(
          "stiffness: regularized delta vanished; the plastic mode cannot be "
          "used for solves at zero strain rate");
    const double we = 0.5 * pc / delta;

    int gdof[6];
    SymTensor2 dev_dphi[6];
    double div_phi[6];
    for (int k = 0; k < 3; ++k) {
      const int d = mesh.vertex_dof[static_cast<std::size_t>(
          tri[static_cast<std::size_t>(k)])];
      const Vec2 g = geo.grad[static_cast<std::size_t>(k)];
      for (int c = 0; c < 2; ++c) {
        const int l = 2 * k + c;
        gdof[l] = d < 0 ? -1 : 2 * d + c;
        const SymTensor2 dphi = basis_sym_grad(g, c);
        dev_dphi[l] = deviator(dphi);
        div_phi[l] = trace(dphi);
      }
    }
    for (int i = 0; i < 6; ++i) {
      if (gdof[i] < 0) continue;
      for (int j = 0; j < 6; ++j) {
        if (gdof[j] < 0) continue;
        const double val =
            we * geo.area *
            (params.lambda * ddot(dev_dphi[i], dev_dphi[j]) +
             div_phi[i] * div_phi[j]);
        A.add(gdof[i], gdof[j], val);
      }
    }
    if (a_energy) {
      // Frozen quadratic form at u_lag plus the pressure part equals
      // a(t, u_lag, u_lag).
      const SymTensor2 dev = deviator(du);
      const double dp2 = params.lambda * ddot(dev, dev) + trace(du) * trace(du);
      *a_energy += geo.area * (we * dp2 - 0.5 * pc * trace(du));
    }
  }
}

void append_coriolis(SparseMatrix& A, const TriMesh& mesh,
                     const std::vector<double>& w, const PhysParams& phys) {
  const double m_omega = phys.m * phys.omega;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = mesh.vertex_dof[static_cast<std::size_t>(v)];
    if (d < 0) continue;
    const double c = w[static_cast<std::size_t>(v)] * m_omega;
    A.add(2 * d, 2 * d + 1, c);
    A.add(2 * d + 1, 2 * d, -c);
  }
}

void append_drag(SparseMatrix& A, std::vector<double>* rhs, double* drag_energy,
                 const TriMesh& mesh, const std::vector<double>& w,
                 const DofVector& u_lag, const std::vector<Vec2>& U_nodal,
                 const OceanForcing& ocean) {
  const double ct = std::cos(ocean.theta);
  const double st = std::sin(ocean.theta);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = mesh.vertex_dof[static_cast<std::size_t>(v)];
    if (d < 0) continue;
    const Vec2 uv = u_lag.at_vertex(v);
    const Vec2 U = U_nodal[static_cast<std::size_t>(v)];
    const double s = norm(U - uv);  // frozen speed factor
    const double wcs = w[static_cast<std::size_t>(v)] * ocean.c_ocean * s;
    A.add(2 * d, 2 * d, wcs * ct);
    A.add(2 * d, 2 * d + 1, -wcs * st);
    A.add(2 * d + 1, 2 * d, wcs * st);
    A.add(2 * d + 1, 2 * d + 1, wcs * ct);
    if (rhs) {
      const Vec2 rot_u = rotate_theta(U, ocean.theta);
      (*rhs)[static_cast<std::size_t>(2 * d)] += wcs * rot_u.x;
      (*rhs)[static_cast<std::size_t>(2 * d + 1)] += wcs * rot_u.y;
    }
    if (drag_energy) {
      const Vec2 tau =
          ocean_drag_pointwise(U, uv, ocean.c_ocean, ocean.theta);
      *drag_energy += w[static_cast<std::size_t>(v)] * dot(tau, uv);
    }
  }
}

void append_lumped_mass(SparseMatrix& A, std::vector<double>& rhs,
                        const TriMesh& mesh, const std::vector<double>& w,
                        const DofVector& u_prev, double m_over_dt) {
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = mesh.vertex_dof[static_cast<std::size_t>(v)];
    if (d < 0) continue;
    const double mw = m_over_dt * w[static_cast<std::size_t>(v)];
    A.add(2 * d, 2 * d, mw);
    A.add(2 * d + 1, 2 * d + 1, mw);
    const Vec2 up = u_prev.at_vertex(v);
    rhs[static_cast<std::size_t>(2 * d)] += mw * up.x;
    rhs[static_cast<std::size_t>(2 * d + 1)] += mw * up.y;
  }
}

void append_consistent_mass(SparseMatrix& A, std::vector<double>& rhs,
                            const TriMesh& mesh, const DofVector& u_prev,
                            double m_over_dt) {
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
    const double w = m_over_dt * geo.area / 12.0;
    for (int i = 0; i < 3; ++i) {
      const int di = mesh.vertex_dof[static_cast<std::size_t>(
          tri[static_cast<std::size_t>(i)])];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const double mij = w * (i == j ? 2.0 : 1.0);
        const int dj = mesh.vertex_dof[static_cast<std::size_t>(
            tri[static_cast<std::size_t>(j)])];
        // Boundary columns carry u_prev = 0, so dropping them is exact.
        if (dj >= 0) {
          A.add(2 * di, 2 * dj, mij);
          A.add(2 * di + 1, 2 * dj + 1, mij);
        }
        const Vec2 up = u_prev.at_vertex(tri[static_cast<std::size_t>(j)]);
        rhs[static_cast<std::size_t>(2 * di)] += mij * up.x;
        rhs[static_cast<std::size_t>(2 * di + 1)] += mij * up.y;
      }
    }
  }
}

AssembledSystem assemble_common(const TriMesh& mesh, const DofVector& u_lag,
                                const DofVector* u_prev, double t, double dt,
                                const IceStrengthField& strength,
                                const OceanForcing& ocean,
                                const BodyForcing& body,
                                const PhysParams& phys,
                                const RheologyParams& params, MassModel mass) {
  require_same_mesh(mesh, u_lag);
  if (u_prev) require_same_mesh(mesh, *u_prev);
  strength.validate();
  ocean.validate();
  phys.validate();
  params.validate();
  if (u_prev && !(dt > 0.0)) throw ConfigError("assembly: dt must be > 0");

  const int n = mesh.n_dofs();
  AssembledSystem sys;
  sys.matrix = SparseMatrix(n);
  sys.rhs.assign(static_cast<std::size_t>(n), 0.0);

  const auto w = lumped_mass(mesh);
  const auto P_nodal = strength.P.eval_all(t, mesh.n_vertices());
  const auto U_nodal = ocean.U.eval_all(t, mesh.n_vertices());

  if (u_prev) {
    const double m_over_dt = phys.m / dt;
    if (mass == MassModel::Lumped)
      append_lumped_mass(sys.matrix, sys.rhs, mesh, w, *u_prev, m_over_dt);
    else
      append_consistent_mass(sys.matrix, sys.rhs, mesh, *u_prev, m_over_dt);
  }
  append_stiffness(sys.matrix, &sys.diagnostics.a_energy, mesh, u_lag, P_nodal,
                   params);
  append_coriolis(sys.matrix, mesh, w, phys);
  append_drag(sys.matrix, &sys.rhs, &sys.diagnostics.drag_energy, mesh, w,
              u_lag, U_nodal, ocean);

  const auto pressure = pressure_load_vector(mesh, P_nodal);
  const auto load = lumped_load_vector(mesh, body_load(t, body, phys,
                                                       mesh.n_vertices()));
  for (int i = 0; i < n; ++i) {
    sys.rhs[static_cast<std::size_t>(i)] +=
        pressure[static_cast<std::size_t>(i)] +
        load[static_cast<std::size_t>(i)];
  }
  sys.matrix.finalize();
  return sys;
}

}  // namespace

SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofVector& u_lag,
                                double t, const IceStrengthField& strength,
                                const RheologyParams& params) {
  require_same_mesh(mesh, u_lag);
  SparseMatrix A(mesh.n_dofs());
  const auto P_nodal = strength.P.eval_all(t, mesh.n_vertices());
  append_stiffness(A, nullptr, mesh, u_lag, P_nodal, params);
  A.finalize();
  return A;
}

SparseMatrix assemble_coriolis(const TriMesh& mesh, const PhysParams& phys) {
  SparseMatrix A(mesh.n_dofs());
  append_coriolis(A, mesh, lumped_mass(mesh), phys);
  A.finalize();
  return A;
}

SparseMatrix assemble_drag(const TriMesh& mesh, const DofVector& u_lag,
                           double t, const OceanForcing& ocean) {
  require_same_mesh(mesh, u_lag);
  SparseMatrix A(mesh.n_dofs());
  const auto U_nodal = ocean.U.eval_all(t, mesh.n_vertices());
  append_drag(A, nullptr, nullptr, mesh, lumped_mass(mesh), u_lag, U_nodal,
              ocean);
  A.finalize();
  return A;
}

AssembledSystem assemble_picard_system(
    const TriMesh& mesh, const DofVector& u_lag, const DofVector& u_prev,
    double t, double dt, const IceStrengthField& strength,
    const OceanForcing& ocean, const BodyForcing& body, const PhysParams& phys,
    const RheologyParams& params, MassModel mass) {
  return assemble_common(mesh, u_lag, &u_prev, t, dt, strength, ocean, body,
                         phys, params, mass);
}

AssembledSystem assemble_steady_system(const TriMesh& mesh,
                                       const DofVector& u_lag, double t,
                                       const IceStrengthField& strength,
                                       const OceanForcing& ocean,
                                       const BodyForcing& body,
                                       const PhysParams& phys,
                                       const RheologyParams& params) {
  return assemble_common(mesh, u_lag, nullptr, t, 0.0, strength, ocean, body,
                         phys, params, MassModel::Lumped);
}

double mass_rate_pairing(const TriMesh& mesh, const DofVector& u_next,
                         const DofVector& u_prev, double m, double dt,
                         MassModel mass) {
  require_same_mesh(mesh, u_next);
  require_same_mesh(mesh, u_prev);
  if (!(dt > 0.0)) throw ConfigError("mass rate: dt must be > 0");
  const double m_over_dt = m / dt;
  double s = 0.0;
  if (mass == MassModel::Lumped) {
    const auto w = lumped_mass(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      const Vec2 un = u_next.at_vertex(v);
      const Vec2 up = u_prev.at_vertex(v);
      s += w[static_cast<std::size_t>(v)] * dot(un - up, un);
    }
  } else {
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      const ElementGeometry geo = element_geometry(mesh, e);
      const auto& tri = mesh.triangles[static_cast<std::size_t>(e)];
      const double w = geo.area / 12.0;
      for (int i = 0; i < 3; ++i) {
        const Vec2 un = u_next.at_vertex(tri[static_cast<std::size_t>(i)]);
        for (int j = 0; j < 3; ++j) {
          const Vec2 dj =
              u_next.at_vertex(tri[static_cast<std::size_t>(j)]) -
              u_prev.at_vertex(tri[static_cast<std::size_t>(j)]);
          s += w * (i == j ? 2.0 : 1.0) * dot(dj, un);
        }
      }
    }
  }
  return m_over_dt * s;
}

}  // namespace icevp
