#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "icevp/forcing.hpp"
#include "icevp/mesh.hpp"

namespace icevp {

// Triplet-accumulated square sparse matrix; finalize() compresses to sorted,
// duplicate-summed CSR. add() is only valid before finalize(), products only
// after.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n) {}

  int dim() const { return n_; }
  bool finalized() const { return finalized_; }

  void add(int row, int col, double value);
  void finalize();

  std::vector<double> multiply(const std::vector<double>& x) const;
  double coeff(int row, int col) const;  // finalized lookup

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& csr() const;

 private:
  int n_ = 0;
  bool finalized_ = false;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat_;
};

// Residual of the spatial operator split into its three bilinear parts, each
// a vector over the velocity dofs:
//   a_part: stress form, element quadrature with P averaged to centroids
//   c_part: Coriolis form, lumped vertex quadrature
//   g_part: ocean drag form, lumped vertex quadrature
struct OperatorParts {
  std::vector<double> a_part;
  std::vector<double> c_part;
  std::vector<double> g_part;
  std::vector<double> total() const;
};

OperatorParts apply_operator_parts(const TriMesh& mesh, const DofVector& u,
                                   double t, const IceStrengthField& strength,
                                   const OceanForcing& ocean,
                                   const PhysParams& phys,
                                   const RheologyParams& params);

std::vector<double> apply_operator(const TriMesh& mesh, const DofVector& u,
                                   double t, const IceStrengthField& strength,
                                   const OceanForcing& ocean,
                                   const PhysParams& phys,
                                   const RheologyParams& params);

// Euclidean duality pairing <r, v>; dimensions must match.
double pairing(const std::vector<double>& r, const std::vector<double>& v);
double pairing(const std::vector<double>& r, const DofVector& v);

// Load vector of a nodal field under lumped vertex quadrature:
// L[(v,c)] = w_v field[v]_c on interior vertices.
std::vector<double> lumped_load_vector(const TriMesh& mesh,
                                       const std::vector<Vec2>& nodal);

// Pressure part of the right-hand side: integral of (P/2) div(phi_i), with P
// averaged per element.
std::vector<double> pressure_load_vector(const TriMesh& mesh,
                                         const std::vector<double>& P_nodal);

// Individual operator matrices with coefficients frozen at u_lag. The
// stiffness K is symmetric positive semidefinite; C is skew; the symmetric
// part of D is positive semidefinite for theta in [0, pi/4].
SparseMatrix assemble_stiffness(const TriMesh& mesh, const DofVector& u_lag,
                                double t, const IceStrengthField& strength,
                                const RheologyParams& params);
SparseMatrix assemble_coriolis(const TriMesh& mesh, const PhysParams& phys);
SparseMatrix assemble_drag(const TriMesh& mesh, const DofVector& u_lag,
                           double t, const OceanForcing& ocean);

enum class MassModel { Lumped, Consistent };

struct AssembledSystem {
  SparseMatrix matrix;  // finalized
  std::vector<double> rhs;
  // Frozen-coefficient energies evaluated at u_lag (they coincide with the
  // nonlinear forms there): stress work a(u_lag, u_lag) and drag work
  // -g(u_lag, u_lag).
  struct Diagnostics {
    double a_energy = 0.0;
    double drag_energy = 0.0;
  } diagnostics;
};

// One lagged-coefficient implicit Euler step system:
//   [(m/dt) M + K(u_lag) + C + D(u_lag)] u = (m/dt) M u_prev
//     + pressure load + drag load + body load.
AssembledSystem assemble_picard_system(
    const TriMesh& mesh, const DofVector& u_lag, const DofVector& u_prev,
    double t, double dt, const IceStrengthField& strength,
    const OceanForcing& ocean, const BodyForcing& body, const PhysParams& phys,
    const RheologyParams& params, MassModel mass = MassModel::Lumped);

// Same without the mass terms: the steady balance at time t.
AssembledSystem assemble_steady_system(const TriMesh& mesh,
                                       const DofVector& u_lag, double t,
                                       const IceStrengthField& strength,
                                       const OceanForcing& ocean,
                                       const BodyForcing& body,
                                       const PhysParams& phys,
                                       const RheologyParams& params);

// (m/dt) (M (u_next - u_prev)) . u_next for the requested mass model.
double mass_rate_pairing(const TriMesh& mesh, const DofVector& u_next,
                         const DofVector& u_prev, double m, double dt,
                         MassModel mass);

}  // namespace icevp
