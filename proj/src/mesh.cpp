#include "icevp/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace icevp {

namespace {

double signed_area2(Vec2 a, Vec2 b, Vec2 c) {
  return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
}

void require_same_mesh(const TriMesh& mesh, const DofVector& u) {
  if (u.mesh().get() != &mesh)
    throw ConfigError("dof vector does not belong to this mesh");
}

}  // namespace

void TriMesh::finalize() {
  const int nv = n_vertices();
  const int nt = n_triangles();
  if (nv < 3 || nt < 1) throw ConfigError("mesh: too few vertices or triangles");

  std::vector<char> referenced(static_cast<std::size_t>(nv), 0);
  // Undirected edge -> incidence count; directed edges must be unique for a
  // consistently oriented conforming mesh.
  std::map<std::pair<int, int>, int> undirected;
  std::map<std::pair<int, int>, int> directed;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    for (int k = 0; k < 3; ++k) {
      const int i = tri[static_cast<std::size_t>(k)];
      if (i < 0 || i >= nv)
        throw ConfigError("mesh: triangle " + std::to_string(t) +
                          " references vertex " + std::to_string(i) +
                          " out of range");
      referenced[static_cast<std::size_t>(i)] = 1;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw ConfigError("mesh: triangle " + std::to_string(t) +
                        " repeats a vertex");
    const double a2 = signed_area2(vertices[static_cast<std::size_t>(tri[0])],
                                   vertices[static_cast<std::size_t>(tri[1])],
                                   vertices[static_cast<std::size_t>(tri[2])]);
    if (!(a2 > 0.0))
      throw ConfigError("mesh: triangle " + std::to_string(t) +
                        " is degenerate or clockwise");
    for (int k = 0; k < 3; ++k) {
      const int i = tri[static_cast<std::size_t>(k)];
      const int j = tri[static_cast<std::size_t>((k + 1) % 3)];
      if (++directed[{i, j}] > 1)
        throw ConfigError("mesh: duplicated directed edge (" +
                          std::to_string(i) + "," + std::to_string(j) +
                          "): mesh is not conforming");
      ++undirected[{std::min(i, j), std::max(i, j)}];
    }
  }
  for (int v = 0; v < nv; ++v)
    if (!referenced[static_cast<std::size_t>(v)])
      throw ConfigError("mesh: vertex " + std::to_string(v) +
                        " belongs to no triangle");

  std::vector<char> computed(static_cast<std::size_t>(nv), 0);
  for (const auto& [edge, count] : undirected) {
    if (count > 2)
      throw ConfigError("mesh: edge shared by more than two triangles");
    if (count == 1) {
      computed[static_cast<std::size_t>(edge.first)] = 1;
      computed[static_cast<std::size_t>(edge.second)] = 1;
    }
  }
  if (boundary.empty()) {
    boundary = computed;
  } else {
    if (static_cast<int>(boundary.size()) != nv)
      throw ConfigError("mesh: boundary flag count mismatch");
    for (int v = 0; v < nv; ++v)
      if ((boundary[static_cast<std::size_t>(v)] != 0) !=
          (computed[static_cast<std::size_t>(v)] != 0))
        throw ConfigError("mesh: boundary flag of vertex " +
                          std::to_string(v) +
                          " contradicts the edge structure");
    boundary = computed;
  }

  vertex_dof.assign(static_cast<std::size_t>(nv), -1);
  interior_vertex.clear();
  n_interior = 0;
  for (int v = 0; v < nv; ++v) {
    if (!boundary[static_cast<std::size_t>(v)]) {
      vertex_dof[static_cast<std::size_t>(v)] = n_interior++;
      interior_vertex.push_back(v);
    }
  }
}

MeshPtr build_rect_mesh(int nx, int ny, double Lx, double Ly) {
  if (nx < 1 || ny < 1)
    throw ConfigError("mesh: nx and ny must be at least 1");
  if (!(Lx > 0.0) || !(Ly > 0.0))
    throw ConfigError("mesh: Lx and Ly must be positive");
  auto mesh = std::make_shared<TriMesh>();
  mesh->vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh->vertices.push_back(
          {Lx * static_cast<double>(i) / static_cast<double>(nx),
           Ly * static_cast<double>(j) / static_cast<double>(ny)});
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh->triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
  // Every cell split along the same (lower-left to upper-right) diagonal.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh->triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh->triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  mesh->finalize();
  return mesh;
}

MeshPtr load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file " + path);
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt))
    throw ConfigError(path + ": expected \"nv nt\" header");
  if (nv < 3 || nt < 1) throw ConfigError(path + ": implausible mesh sizes");
  auto mesh = std::make_shared<TriMesh>();
  mesh->vertices.resize(static_cast<std::size_t>(nv));
  mesh->boundary.resize(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    double x = 0.0, y = 0.0;
    int b = 0;
    if (!(in >> x >> y >> b))
      throw ConfigError(path + ": vertex line " + std::to_string(v) +
                        " malformed (expected \"x y b\")");
    if (b != 0 && b != 1)
      throw ConfigError(path + ": boundary flag must be 0 or 1");
    mesh->vertices[static_cast<std::size_t>(v)] = {x, y};
    mesh->boundary[static_cast<std::size_t>(v)] = static_cast<char>(b);
  }
  mesh->triangles.resize(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    int i = 0, j = 0, k = 0;
    if (!(in >> i >> j >> k))
      throw ConfigError(path + ": triangle line " + std::to_string(t) +
                        " malformed (expected \"i j k\")");
    mesh->triangles[static_cast<std::size_t>(t)] = {i, j, k};
  }
  mesh->finalize();
  return mesh;
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file " + path);
  out << mesh.n_vertices() << " " << mesh.n_triangles() << "\n";
  char buf[80];
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 p = mesh.vertices[static_cast<std::size_t>(v)];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", p.x, p.y,
                  mesh.boundary[static_cast<std::size_t>(v)] ? 1 : 0);
    out << buf;
  }
  for (const auto& tri : mesh.triangles)
    out << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
}

ElementGeometry element_geometry(const TriMesh& mesh, int tri) {
  if (tri < 0 || tri >= mesh.n_triangles())
    throw ConfigError("element index out of range");
  const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
  const Vec2 p0 = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Vec2 p1 = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Vec2 p2 = mesh.vertices[static_cast<std::size_t>(t[2])];
  const double a2 = signed_area2(p0, p1, p2);
  if (!(a2 > 0.0))
    throw ConfigError("element " + std::to_string(tri) +
                      " is degenerate or clockwise");
  ElementGeometry geo;
  geo.area = 0.5 * a2;
  // grad(phi_k) = perp(p_{k+2} - p_{k+1}) / (2 area), perp = quarter turn.
  const Vec2 e0 = p2 - p1;
  const Vec2 e1 = p0 - p2;
  const Vec2 e2 = p1 - p0;
  geo.grad[0] = {-e0.y / a2, e0.x / a2};
  geo.grad[1] = {-e1.y / a2, e1.x / a2};
  geo.grad[2] = {-e2.y / a2, e2.x / a2};
  return geo;
}

DofVector operator+(const DofVector& a, const DofVector& b) {
  if (a.mesh() != b.mesh())
    throw ConfigError("dof vectors live on different meshes");
  DofVector out = a;
  for (int i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

DofVector operator-(const DofVector& a, const DofVector& b) {
  if (a.mesh() != b.mesh())
    throw ConfigError("dof vectors live on different meshes");
  DofVector out = a;
  for (int i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

DofVector operator*(double s, const DofVector& a) {
  DofVector out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

SymTensor2 element_sym_gradient(const TriMesh& mesh, const DofVector& u,
                                int tri) {
  require_same_mesh(mesh, u);
  const ElementGeometry geo = element_geometry(mesh, tri);
  const auto& t = mesh.triangles[static_cast<std::size_t>(tri)];
  SymTensor2 du;
  for (int k = 0; k < 3; ++k) {
    const Vec2 val = u.at_vertex(t[static_cast<std::size_t>(k)]);
    const Vec2 g = geo.grad[static_cast<std::size_t>(k)];
    du.xx += val.x * g.x;
    du.yy += val.y * g.y;
    du.xy += 0.5 * (val.x * g.y + val.y * g.x);
  }
  return du;
}

DiscreteNorms discrete_norms(const TriMesh& mesh, const DofVector& u,
                             const RheologyParams& params) {
  require_same_mesh(mesh, u);
  DiscreteNorms out;
  double h2 = 0.0, v2 = 0.0;
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
    const Vec2 val[3] = {u.at_vertex(t[0]), u.at_vertex(t[1]),
                         u.at_vertex(t[2])};
    // Consistent P1 mass: int phi_i phi_j = area/12 (1 + delta_ij).
    const double w = geo.area / 12.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double f = w * (i == j ? 2.0 : 1.0);
        h2 += f * (val[i].x * val[j].x + val[i].y * val[j].y);
      }
    Vec2 grad_x{}, grad_y{};
    for (int k = 0; k < 3; ++k) {
      grad_x += val[k].x * geo.grad[static_cast<std::size_t>(k)];
      grad_y += val[k].y * geo.grad[static_cast<std::size_t>(k)];
    }
    v2 += geo.area * (dot(grad_x, grad_x) + dot(grad_y, grad_y));
    const SymTensor2 du{grad_x.x, 0.5 * (grad_x.y + grad_y.x), grad_y.y};
    const double dp = delta_p(du, params);
    out.deltap_sq_integral += geo.area * dp * dp;
    out.div_l1 += geo.area * std::abs(trace(du));
  }
  out.h_norm = std::sqrt(h2);
  out.v_norm = std::sqrt(v2);
  return out;
}

std::vector<double> lumped_mass(const TriMesh& mesh) {
  std::vector<double> w(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const double third = geo.area / 3.0;
    for (int k = 0; k < 3; ++k)
      w[static_cast<std::size_t>(
          mesh.triangles[static_cast<std::size_t>(e)]
                        [static_cast<std::size_t>(k)])] += third;
  }
  return w;
}

double v_seminorm(const DofVector& u) {
  if (!u.mesh()) return 0.0;
  const TriMesh& mesh = *u.mesh();
  double v2 = 0.0;
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
    Vec2 grad_x{}, grad_y{};
    for (int k = 0; k < 3; ++k) {
      const Vec2 val = u.at_vertex(t[static_cast<std::size_t>(k)]);
      grad_x += val.x * geo.grad[static_cast<std::size_t>(k)];
      grad_y += val.y * geo.grad[static_cast<std::size_t>(k)];
    }
    v2 += geo.area * (dot(grad_x, grad_x) + dot(grad_y, grad_y));
  }
  return std::sqrt(v2);
}

double h_norm_lumped(const DofVector& u) {
  if (!u.mesh()) return 0.0;
  const TriMesh& mesh = *u.mesh();
  const auto w = lumped_mass(mesh);
  double h2 = 0.0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 val = u.at_vertex(v);
    h2 += w[static_cast<std::size_t>(v)] * dot(val, val);
  }
  return std::sqrt(h2);
}

double h_norm_consistent(const DofVector& u) {
  if (!u.mesh()) return 0.0;
  RheologyParams dummy;  // lambda plays no role in the L2 entry
  return discrete_norms(*u.mesh(), u, dummy).h_norm;
}

double max_speed(const DofVector& u) {
  double m = 0.0;
  for (int i = 0; i + 1 < u.size(); i += 2)
    m = std::max(m, std::sqrt(u[i] * u[i] + u[i + 1] * u[i + 1]));
  return m;
}

}  // namespace icevp
