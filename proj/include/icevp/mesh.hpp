#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "icevp/errors.hpp"
#include "icevp/rheology.hpp"
#include "icevp/vec2.hpp"

namespace icevp {

// Conforming triangulation. Triangles are counterclockwise; boundary[v] is 1
// exactly when v lies on a boundary edge (an edge with a single incident
// triangle). finalize() checks all of this and builds the dof maps.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> boundary;
  std::vector<int> vertex_dof;       // interior index, -1 on the boundary
  std::vector<int> interior_vertex;  // inverse map
  int n_interior = 0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_dofs() const { return 2 * n_interior; }

  void finalize();
};

using MeshPtr = std::shared_ptr<const TriMesh>;

// Structured mesh of [0,Lx] x [0,Ly] with nx x ny cells, each cell split
// along the same diagonal: (nx+1)(ny+1) vertices, 2 nx ny triangles.
MeshPtr build_rect_mesh(int nx, int ny, double Lx, double Ly);

// Plain-text format: "nv nt" header, nv lines "x y b", nt lines "i j k"
// (0-based, counterclockwise). Loading validates against the finalize()
// invariants, including the stored boundary flags.
MeshPtr load_mesh(const std::string& path);
void save_mesh(const TriMesh& mesh, const std::string& path);

struct ElementGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad;  // constant P1 basis gradients; sum to zero
};

// Throws ConfigError for degenerate or misoriented triangles (area <= 0).
ElementGeometry element_geometry(const TriMesh& mesh, int tri);

// Velocity degrees of freedom: (x, y) pair per interior vertex, boundary
// vertices identically zero (homogeneous Dirichlet by construction).
class DofVector {
 public:
  DofVector() = default;
  explicit DofVector(MeshPtr mesh)
      : mesh_(std::move(mesh)), v_(mesh_ ? mesh_->n_dofs() : 0, 0.0) {}

  int size() const { return static_cast<int>(v_.size()); }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }
  const MeshPtr& mesh() const { return mesh_; }

  Vec2 at_vertex(int v) const {
    const int d = mesh_->vertex_dof[v];
    return d < 0 ? Vec2{} : Vec2{v_[2 * d], v_[2 * d + 1]};
  }
  // Writes to boundary vertices are dropped: the trace stays zero.
  void set_vertex(int v, Vec2 value) {
    const int d = mesh_->vertex_dof[v];
    if (d >= 0) {
      v_[2 * d] = value.x;
      v_[2 * d + 1] = value.y;
    }
  }

 private:
  MeshPtr mesh_;
  std::vector<double> v_;
};

DofVector operator+(const DofVector& a, const DofVector& b);
DofVector operator-(const DofVector& a, const DofVector& b);
DofVector operator*(double s, const DofVector& a);

// Symmetric gradient of u on one element; constant for P1 elements.
SymTensor2 element_sym_gradient(const TriMesh& mesh, const DofVector& u,
                                int tri);

struct DiscreteNorms {
  double h_norm = 0.0;             // L2 norm via the consistent mass matrix
  double v_norm = 0.0;             // gradient seminorm (full norm on zero-trace fields)
  double deltap_sq_integral = 0.0; // integral of delta_p(Du)^2
  double div_l1 = 0.0;             // integral of |div u|
};

// lambda from params enters the delta_p integral; the other entries do not
// depend on it.
DiscreteNorms discrete_norms(const TriMesh& mesh, const DofVector& u,
                             const RheologyParams& params);

// Row-sum (lumped) mass weights per vertex: sum of incident areas / 3.
// Adds up to the domain area.
std::vector<double> lumped_mass(const TriMesh& mesh);

double v_seminorm(const DofVector& u);
double h_norm_lumped(const DofVector& u);
double h_norm_consistent(const DofVector& u);

// Max vertexwise speed; 0 for the empty vector.
double max_speed(const DofVector& u);

}  // namespace icevp
