#pragma once

#include <string>
#include <vector>

#include "icevp/errors.hpp"
#include "icevp/vec2.hpp"

namespace icevp {

struct PhysParams {
  double m = 300.0;        // ice mass per unit area [kg/m^2]
  double omega = 1.46e-4;  // Coriolis parameter [1/s]
  double g = 9.81;         // gravitational acceleration [m/s^2]
  void validate() const;   // m > 0, g > 0
};

// Counterclockwise quarter turn (-y, x).
inline Vec2 perp(Vec2 v) { return {-v.y, v.x}; }

// v rotated by theta: cos(theta) v + sin(theta) perp(v).
inline Vec2 rotate_theta(Vec2 v, double theta) {
  return {std::cos(theta) * v.x - std::sin(theta) * v.y,
          std::sin(theta) * v.x + std::cos(theta) * v.y};
}

// Quadratic turning drag c |U - u| (U - u)_theta. Meaningful for
// 0 <= theta <= pi/4; the formula itself is evaluated for any theta.
inline Vec2 ocean_drag_pointwise(Vec2 U, Vec2 u, double c, double theta) {
  const Vec2 d = U - u;
  return (c * norm(d)) * rotate_theta(d, theta);
}

// cos(theta)(|a|^3 + |b|^3) - |a| (a_theta . b) - |b| (b_theta . a).
// Nonnegative for theta in [0, pi/4]; its sign controls monotonicity of the
// drag in the relative velocity.
double drag_monotone_integrand(Vec2 a, Vec2 b, double theta);

// Discriminant governing the cubic that decides the integrand's sign:
// d(S, T) = (1 - S^2)^2 T^2 + (-2 S^2 + 24 S - 18)(1 - S^2) T
//           + (S^4 + 8 S^3 + 18 S^2 - 27),
// with S = cos(angle between a and b) and T = tan(theta)^2.
double discriminant_d(double S, double T);

// Rescaled cubic p(gamma) = gamma^3 - (S + tan(theta) S') gamma^2
// + (-S + tan(theta) S') gamma + 1 with S' = sin(angle), evaluated with
// S = cos(phi); positivity over gamma > 0 is equivalent to integrand >= 0.
double rescaled_p(double gamma, double S, double theta);

// Piecewise-linear-in-time nodal scalar field. A uniform series is constant
// in space and time; a sliced series interpolates linearly between stored
// time slices and refuses to extrapolate. A single slice is time-independent.
class NodalScalarSeries {
 public:
  NodalScalarSeries() = default;
  static NodalScalarSeries uniform(double value);
  static NodalScalarSeries from_slices(std::vector<double> times,
                                       std::vector<std::vector<double>> slices);

  bool is_uniform() const { return uniform_; }
  int node_count() const;  // -1 when uniform
  double eval(double t, int node) const;
  std::vector<double> eval_all(double t, int n_nodes) const;
  double min_stored() const;  // smallest value over all slices

 private:
  void check_time(double t) const;
  bool uniform_ = true;
  double value_ = 0.0;
  std::vector<double> times_;
  std::vector<std::vector<double>> slices_;
};

class NodalVectorSeries {
 public:
  NodalVectorSeries() = default;
  static NodalVectorSeries uniform(Vec2 value);
  static NodalVectorSeries from_slices(std::vector<double> times,
                                       std::vector<std::vector<Vec2>> slices);

  bool is_uniform() const { return uniform_; }
  int node_count() const;  // -1 when uniform
  Vec2 eval(double t, int node) const;
  std::vector<Vec2> eval_all(double t, int n_nodes) const;
  // Same series with a constant offset added to every value.
  NodalVectorSeries shifted(Vec2 offset) const;

 private:
  void check_time(double t) const;
  bool uniform_ = true;
  Vec2 value_{};
  std::vector<double> times_;
  std::vector<std::vector<Vec2>> slices_;
};

struct OceanForcing {
  double c_ocean = 0.0;  // drag coefficient [kg/m^2 / m]
  double theta = 0.0;    // turning angle, 0 <= theta <= pi/4
  NodalVectorSeries U;   // ocean surface velocity [m/s]
  void validate() const;
};

struct BodyForcing {
  NodalVectorSeries tau_atm;  // wind stress [N/m^2]
  NodalVectorSeries grad_H;   // sea-surface tilt (dimensionless slope)
  NodalVectorSeries f_extra;  // additional body force [N/m^2]
};

// Ice strength P, bounded below by P_floor > 0 everywhere.
struct IceStrengthField {
  NodalScalarSeries P = NodalScalarSeries::uniform(1.0);
  double P_floor = 1.0;
  void validate() const;
};

// Nodal body load tau_atm - m g grad_H + f_extra at time t.
std::vector<Vec2> body_load(double t, const BodyForcing& body,
                            const PhysParams& phys, int n_nodes);

// CSV loaders. Vector header: "t,node_id,vx,vy"; scalar: "t,node_id,val".
// Rows are grouped into time slices; times must be strictly ascending and
// every slice must cover node ids 0..n-1 exactly once.
NodalVectorSeries load_vector_series_csv(const std::string& path);
NodalScalarSeries load_scalar_series_csv(const std::string& path);

}  // namespace icevp
