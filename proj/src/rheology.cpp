#include "icevp/rheology.hpp"

#include <algorithm>
#include <sstream>

namespace icevp {

std::string to_string(DeltaMode mode) {
  switch (mode) {
    case DeltaMode::CutoffBoth: return "cutoff_both";
    case DeltaMode::Plastic: return "plastic";
    case DeltaMode::EpsOnly: return "eps_only";
    case DeltaMode::EpsUpper: return "eps_upper";
    case DeltaMode::EpsUpperMax: return "eps_upper_max";
    case DeltaMode::EpsBoth: return "eps_both";
  }
  throw ConfigError("unknown delta mode value");
}

DeltaMode delta_mode_from_string(const std::string& name) {
  if (name == "cutoff_both") return DeltaMode::CutoffBoth;
  if (name == "plastic") return DeltaMode::Plastic;
  if (name == "eps_only") return DeltaMode::EpsOnly;
  if (name == "eps_upper") return DeltaMode::EpsUpper;
  if (name == "eps_upper_max") return DeltaMode::EpsUpperMax;
  if (name == "eps_both") return DeltaMode::EpsBoth;
  throw ConfigError("unknown delta mode \"" + name +
                    "\" (expected cutoff_both, plastic, eps_only, eps_upper, "
                    "eps_upper_max or eps_both)");
}

RheologyParams RheologyParams::make(double e_bar, double delta_lo,
                                    double delta_hi, double epsilon,
                                    DeltaMode mode) {
  RheologyParams p;
  p.e_bar = e_bar;
  p.lambda = 2.0 / (e_bar * e_bar);
  p.delta_lo = delta_lo;
  p.delta_hi = delta_hi;
  p.epsilon = epsilon;
  p.mode = mode;
  p.validate();
  return p;
}

void RheologyParams::validate() const {
  if (!(e_bar > 0.0)) throw ConfigError("rheology: e_bar must be > 0");
  if (lambda != 2.0 / (e_bar * e_bar))
    throw ConfigError("rheology: lambda must equal 2 / e_bar^2");
  if (!(delta_lo > 0.0)) throw ConfigError("rheology: delta_lo must be > 0");
  if (!(delta_hi > delta_lo))
    throw ConfigError("rheology: delta_hi must exceed delta_lo");
  if (!(epsilon >= 0.0)) throw ConfigError("rheology: epsilon must be >= 0");
  if ((mode == DeltaMode::CutoffBoth || mode == DeltaMode::Plastic) &&
      epsilon != 0.0)
    throw ConfigError(
        "rheology: epsilon must be 0 in cutoff_both and plastic modes");
}

TensorInvariants tensor_invariants(const SymTensor2& z) {
  TensorInvariants inv;
  inv.tr = trace(z);
  inv.dev = deviator(z);
  inv.dev_norm = norm(inv.dev);
  return inv;
}

SymTensor2 d_lambda(const SymTensor2& z, const RheologyParams& p) {
  const double tr = trace(z);
  const SymTensor2 dev = deviator(z);
  return {p.lambda * dev.xx + tr, p.lambda * dev.xy, p.lambda * dev.yy + tr};
}

double delta_p(const SymTensor2& z, const RheologyParams& p) {
  const double tr = trace(z);
  const SymTensor2 dev = deviator(z);
  return std::sqrt(p.lambda * ddot(dev, dev) + tr * tr);
}

double delta_from_dp(double dp, const RheologyParams& p) {
  switch (p.mode) {
    case DeltaMode::CutoffBoth:
      return std::clamp(dp, p.delta_lo, p.delta_hi);
    case DeltaMode::Plastic:
      return dp;
    case DeltaMode::EpsOnly:
      return std::sqrt(p.epsilon + dp * dp);
    case DeltaMode::EpsUpper:
      return std::min(std::sqrt(p.epsilon + dp * dp), p.delta_hi);
    case DeltaMode::EpsUpperMax:
      return std::max(std::sqrt(p.epsilon + dp * dp), p.delta_hi);
    case DeltaMode::EpsBoth:
      return std::clamp(std::sqrt(p.epsilon + dp * dp), p.delta_lo,
                        p.delta_hi);
  }
  throw ConfigError("unknown delta mode value");
}

double delta_reg(const SymTensor2& z, const RheologyParams& p) {
  return delta_from_dp(delta_p(z, p), p);
}

SymTensor2 sigma(double strength, const SymTensor2& z,
                 const RheologyParams& p) {
  if (!(strength >= 0.0))
    throw ConfigError("sigma: ice strength must be nonnegative");
  if (p.mode == DeltaMode::Plastic && z.is_zero()) return {};
  const double delta = delta_reg(z, p);
  if (delta == 0.0)
    throw std::domain_error(
        "sigma: regularized delta vanished (epsilon = 0 at z = 0)");
  const SymTensor2 dl = d_lambda(z, p);
  const double half_p = 0.5 * strength;
  return {half_p * (dl.xx / delta - 1.0), half_p * (dl.xy / delta),
          half_p * (dl.yy / delta - 1.0)};
}

double yield_residual(double strength, const SymTensor2& z,
                      const RheologyParams& p) {
  if (!(strength > 0.0))
    throw ConfigError("yield_residual: ice strength must be positive");
  if (p.mode == DeltaMode::Plastic && z.is_zero())
    throw std::domain_error(
        "yield_residual: undefined for the plastic law at z = 0");
  const SymTensor2 shifted =
      sigma(strength, z, p) + (0.5 * strength) * SymTensor2::identity();
  const double tr = trace(shifted);
  const SymTensor2 dev = deviator(shifted);
  const double lhs = 0.25 * tr * tr + ddot(dev, dev) / p.lambda;
  const double ratio = delta_p(z, p) / delta_reg(z, p);
  return lhs - 0.25 * strength * strength * ratio * ratio;
}

double scalar_profile(double x, const RheologyParams& p) {
  if (!(x >= 0.0)) throw ConfigError("scalar_profile: x must be >= 0");
  if (p.mode == DeltaMode::Plastic) return 1.0;
  const double d = delta_from_dp(x, p);
  if (d == 0.0) return 1.0;  // epsilon = 0 at x = 0: plastic limit
  return x / d;
}

}  // namespace icevp
