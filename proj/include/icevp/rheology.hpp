#pragma once

#include <cmath>
#include <string>

#include "icevp/errors.hpp"

namespace icevp {

// Symmetric 2x2 tensor (strain rate or stress). The off-diagonal entry is
// stored once; contractions count it twice.
struct SymTensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static SymTensor2 identity() { return {1.0, 0.0, 1.0}; }
  bool is_zero() const { return xx == 0.0 && xy == 0.0 && yy == 0.0; }
};

inline SymTensor2 operator+(const SymTensor2& a, const SymTensor2& b) {
  return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}
inline SymTensor2 operator-(const SymTensor2& a, const SymTensor2& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}
inline SymTensor2 operator*(double s, const SymTensor2& z) {
  return {s * z.xx, s * z.xy, s * z.yy};
}
inline bool operator==(const SymTensor2& a, const SymTensor2& b) {
  return a.xx == b.xx && a.xy == b.xy && a.yy == b.yy;
}

// Double contraction a : b.
inline double ddot(const SymTensor2& a, const SymTensor2& b) {
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

// Frobenius norm; |z|^2 = xx^2 + 2 xy^2 + yy^2.
inline double norm(const SymTensor2& z) { return std::sqrt(ddot(z, z)); }

inline double trace(const SymTensor2& z) { return z.xx + z.yy; }

// Trace-free part z - (tr z / 2) Id.
inline SymTensor2 deviator(const SymTensor2& z) {
  const double half_tr = 0.5 * (z.xx + z.yy);
  return {z.xx - half_tr, z.xy, z.yy - half_tr};
}

// Regularization of the inverse-viscosity denominator delta.
enum class DeltaMode {
  CutoffBoth,   // clamp delta_p to [delta_lo, delta_hi]
  Plastic,      // delta_p itself; degenerate at zero strain rate
  EpsOnly,      // sqrt(epsilon + delta_p^2); no upper bound
  EpsUpper,     // min(sqrt(epsilon + delta_p^2), delta_hi): epsilon floor,
                // capped at delta_hi so large rates stay bounded
  EpsUpperMax,  // max(sqrt(epsilon + delta_p^2), delta_hi): floors the
                // denominator at delta_hi instead; kept for comparison only
  EpsBoth,      // clamp(sqrt(epsilon + delta_p^2), delta_lo, delta_hi)
};

std::string to_string(DeltaMode mode);
DeltaMode delta_mode_from_string(const std::string& name);

// Constitutive parameters. lambda = 2/e_bar^2 is derived and must stay in
// sync with e_bar; make() computes it, validate() enforces it.
struct RheologyParams {
  double e_bar = 2.0;      // yield-ellipse aspect ratio
  double lambda = 0.5;     // 2 / e_bar^2
  double delta_lo = 2e-9;  // lower strain-rate cut-off [1/s]
  double delta_hi = 2e-4;  // upper strain-rate cut-off [1/s]
  double epsilon = 0.0;    // squared-rate offset [1/s^2]
  DeltaMode mode = DeltaMode::CutoffBoth;

  static RheologyParams make(double e_bar, double delta_lo, double delta_hi,
                             double epsilon, DeltaMode mode);
  void validate() const;  // throws ConfigError
};

struct TensorInvariants {
  double tr = 0.0;
  SymTensor2 dev;
  double dev_norm = 0.0;
};

TensorInvariants tensor_invariants(const SymTensor2& z);

// D^lambda z = lambda dev z + (tr z) Id.
SymTensor2 d_lambda(const SymTensor2& z, const RheologyParams& p);

// delta_p(z) = sqrt(lambda |dev z|^2 + (tr z)^2). Satisfies
// sqrt(lambda) |z| <= delta_p(z) <= sqrt(2) |z| for lambda <= 2 and
// D^lambda z : z = delta_p(z)^2.
double delta_p(const SymTensor2& z, const RheologyParams& p);

// Mode transform applied to a delta_p value; delta_reg = delta_from_dp(delta_p).
double delta_from_dp(double dp, const RheologyParams& p);
double delta_reg(const SymTensor2& z, const RheologyParams& p);

// sigma(P, z) = (P/2) (D^lambda z / delta_reg(z) - Id).
// Plastic mode maps z = 0 to 0 by definition. Throws std::domain_error when
// the denominator vanishes (EpsOnly-type modes with epsilon = 0 at z = 0).
// Note the one-sided rest state: for dev z = 0 with tr z inside the band,
// sigma = 0 when tr z > 0 but sigma = -P Id when tr z < 0.
SymTensor2 sigma(double strength, const SymTensor2& z, const RheologyParams& p);

// (1/4) tr(sigma + (P/2) Id)^2 + (1/lambda) |dev(sigma + (P/2) Id)|^2
//   - (P^2/4) (delta_p/delta_reg)^2,
// identically zero in exact arithmetic: sigma + (P/2) Id = (P/2) D^lambda z / delta,
// tr D^lambda z = 2 tr z and dev D^lambda z = lambda dev z.
double yield_residual(double strength, const SymTensor2& z,
                      const RheologyParams& p);

// Scalar profile f(x) = x / delta_from_dp(x) for x >= 0; nondecreasing in
// every mode, which is what makes sigma monotone. Plastic gives f = 1.
double scalar_profile(double x, const RheologyParams& p);

}  // namespace icevp
