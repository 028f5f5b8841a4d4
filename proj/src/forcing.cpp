#include "icevp/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace icevp {

void PhysParams::validate() const {
  if (!(m > 0.0)) throw ConfigError("physics: m must be > 0");
  if (!(g > 0.0)) throw ConfigError("physics: g must be > 0");
  if (!std::isfinite(omega)) throw ConfigError("physics: omega must be finite");
}

double drag_monotone_integrand(Vec2 a, Vec2 b, double theta) {
  const double na = norm(a);
  const double nb = norm(b);
  return std::cos(theta) * (na * na * na + nb * nb * nb) -
         na * dot(rotate_theta(a, theta), b) -
         nb * dot(rotate_theta(b, theta), a);
}

double discriminant_d(double S, double T) {
  const double one_m_s2 = 1.0 - S * S;
  return one_m_s2 * one_m_s2 * T * T +
         (-2.0 * S * S + 24.0 * S - 18.0) * one_m_s2 * T +
         (S * S * S * S + 8.0 * S * S * S + 18.0 * S * S - 27.0);
}

double rescaled_p(double gamma, double S, double theta) {
  const double sp = std::sqrt(std::max(0.0, 1.0 - S * S));
  const double t = std::tan(theta);
  return gamma * gamma * gamma - (S + t * sp) * gamma * gamma +
         (-S + t * sp) * gamma + 1.0;
}

// --- time series -----------------------------------------------------------

namespace {

// Index i with times[i] <= t <= times[i+1] plus the interpolation weight.
std::pair<std::size_t, double> locate(const std::vector<double>& times,
                                      double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi == 0) hi = 1;
  if (hi == times.size()) hi = times.size() - 1;
  const std::size_t lo = hi - 1;
  const double span = times[hi] - times[lo];
  const double w = span > 0.0 ? (t - times[lo]) / span : 0.0;
  return {lo, w};
}

void validate_times(const std::vector<double>& times) {
  if (times.empty()) throw ConfigError("time series: no slices");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw ConfigError("time series: times must be strictly ascending");
}

}  // namespace

NodalScalarSeries NodalScalarSeries::uniform(double value) {
  NodalScalarSeries s;
  s.uniform_ = true;
  s.value_ = value;
  return s;
}

NodalScalarSeries NodalScalarSeries::from_slices(
    std::vector<double> times, std::vector<std::vector<double>> slices) {
  validate_times(times);
  if (times.size() != slices.size())
    throw ConfigError("time series: slice/time count mismatch");
  const std::size_t n = slices.front().size();
  if (n == 0) throw ConfigError("time series: empty slice");
  for (const auto& s : slices)
    if (s.size() != n)
      throw ConfigError("time series: slices differ in node count");
  NodalScalarSeries s;
  s.uniform_ = false;
  s.times_ = std::move(times);
  s.slices_ = std::move(slices);
  return s;
}

int NodalScalarSeries::node_count() const {
  return uniform_ ? -1 : static_cast<int>(slices_.front().size());
}

void NodalScalarSeries::check_time(double t) const {
  if (times_.size() < 2) return;  // single slice: time-independent
  if (t < times_.front() || t > times_.back()) {
    std::ostringstream os;
    os << "time series: t = " << t << " outside stored range ["
       << times_.front() << ", " << times_.back() << "], no extrapolation";
    throw ConfigError(os.str());
  }
}

double NodalScalarSeries::eval(double t, int node) const {
  if (uniform_) return value_;
  check_time(t);
  if (node < 0 || node >= node_count())
    throw ConfigError("time series: node index out of range");
  if (times_.size() == 1) return slices_.front()[node];
  const auto [lo, w] = locate(times_, t);
  return (1.0 - w) * slices_[lo][node] + w * slices_[lo + 1][node];
}

std::vector<double> NodalScalarSeries::eval_all(double t, int n_nodes) const {
  if (!uniform_ && node_count() != n_nodes)
    throw ConfigError("time series: node count does not match the mesh");
  std::vector<double> out(static_cast<std::size_t>(n_nodes));
  for (int v = 0; v < n_nodes; ++v) out[v] = eval(t, uniform_ ? 0 : v);
  return out;
}

double NodalScalarSeries::min_stored() const {
  if (uniform_) return value_;
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : slices_)
    for (double x : s) m = std::min(m, x);
  return m;
}

NodalVectorSeries NodalVectorSeries::uniform(Vec2 value) {
  NodalVectorSeries s;
  s.uniform_ = true;
  s.value_ = value;
  return s;
}

NodalVectorSeries NodalVectorSeries::from_slices(
    std::vector<double> times, std::vector<std::vector<Vec2>> slices) {
  validate_times(times);
  if (times.size() != slices.size())
    throw ConfigError("time series: slice/time count mismatch");
  const std::size_t n = slices.front().size();
  if (n == 0) throw ConfigError("time series: empty slice");
  for (const auto& s : slices)
    if (s.size() != n)
      throw ConfigError("time series: slices differ in node count");
  NodalVectorSeries s;
  s.uniform_ = false;
  s.times_ = std::move(times);
  s.slices_ = std::move(slices);
  return s;
}

int NodalVectorSeries::node_count() const {
  return uniform_ ? -1 : static_cast<int>(slices_.front().size());
}

void NodalVectorSeries::check_time(double t) const {
  if (times_.size() < 2) return;
  if (t < times_.front() || t > times_.back()) {
    std::ostringstream os;
    os << "time series: t = " << t << " outside stored range ["
       << times_.front() << ", " << times_.back() << "], no extrapolation";
    throw ConfigError(os.str());
  }
}

Vec2 NodalVectorSeries::eval(double t, int node) const {
  if (uniform_) return value_;
  check_time(t);
  if (node < 0 || node >= node_count())
    throw ConfigError("time series: node index out of range");
  if (times_.size() == 1) return slices_.front()[node];
  const auto [lo, w] = locate(times_, t);
  const Vec2 a = slices_[lo][node];
  const Vec2 b = slices_[lo + 1][node];
  return {(1.0 - w) * a.x + w * b.x, (1.0 - w) * a.y + w * b.y};
}

std::vector<Vec2> NodalVectorSeries::eval_all(double t, int n_nodes) const {
  if (!uniform_ && node_count() != n_nodes)
    throw ConfigError("time series: node count does not match the mesh");
  std::vector<Vec2> out(static_cast<std::size_t>(n_nodes));
  for (int v = 0; v < n_nodes; ++v) out[v] = eval(t, uniform_ ? 0 : v);
  return out;
}

NodalVectorSeries NodalVectorSeries::shifted(Vec2 offset) const {
  NodalVectorSeries out = *this;
  if (out.uniform_) {
    out.value_ += offset;
  } else {
    for (auto& slice : out.slices_)
      for (auto& v : slice) v += offset;
  }
  return out;
}

void OceanForcing::validate() const {
  if (!(c_ocean >= 0.0)) throw ConfigError("ocean: c_ocean must be >= 0");
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 4.0))
    throw ConfigError("ocean: theta must lie in [0, pi/4]");
}

void IceStrengthField::validate() const {
  if (!(P_floor > 0.0)) throw ConfigError("ice strength: P_floor must be > 0");
  if (P.min_stored() < P_floor)
    throw ConfigError("ice strength: P drops below P_floor");
}

std::vector<Vec2> body_load(double t, const BodyForcing& body,
                            const PhysParams& phys, int n_nodes) {
  const auto tau = body.tau_atm.eval_all(t, n_nodes);
  const auto grad_h = body.grad_H.eval_all(t, n_nodes);
  const auto extra = body.f_extra.eval_all(t, n_nodes);
  std::vector<Vec2> out(static_cast<std::size_t>(n_nodes));
  const double mg = phys.m * phys.g;
  for (int v = 0; v < n_nodes; ++v)
    out[v] = tau[v] - mg * grad_h[v] + extra[v];
  return out;
}

// --- CSV loading ------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(strip(cur));
  return out;
}

double parse_num(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path + ":" + std::to_string(line_no) +
                      ": not a number: \"" + s + "\"");
  }
}

struct CsvRows {
  std::vector<double> times;                      // one per slice
  std::vector<std::vector<std::vector<double>>> values;  // slice -> node -> cols
};

// Shared slicing logic; n_cols is 2 for vector series, 1 for scalars.
CsvRows load_csv(const std::string& path, const std::string& header,
                 int n_cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open forcing file " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError(path + ": empty forcing file");
  if (strip(line) != header)
    throw ConfigError(path + ":1: header must be \"" + header + "\"");

  struct Row {
    double t;
    int node;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto f = split_csv(line);
    if (static_cast<int>(f.size()) != 2 + n_cols)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(2 + n_cols) +
                        " columns");
    Row r;
    r.t = parse_num(f[0], path, line_no);
    const double node_raw = parse_num(f[1], path, line_no);
    r.node = static_cast<int>(node_raw);
    if (r.node < 0 || static_cast<double>(r.node) != node_raw)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": node_id must be a nonnegative integer");
    for (int c = 0; c < n_cols; ++c)
      r.vals.push_back(parse_num(f[2 + c], path, line_no));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");

  // Group rows into slices; times ascending across slices.
  CsvRows out;
  std::size_t i = 0;
  while (i < rows.size()) {
    const double t = rows[i].t;
    if (!out.times.empty() && !(t > out.times.back()))
      throw ConfigError(path + ": slice times must be strictly ascending");
    std::size_t j = i;
    while (j < rows.size() && rows[j].t == t) ++j;
    const std::size_t n = j - i;
    if (!out.values.empty() && out.values.front().size() != n)
      throw ConfigError(path + ": slices differ in node count");
    std::vector<std::vector<double>> slice(n);
    std::vector<char> seen(n, 0);
    for (std::size_t k = i; k < j; ++k) {
      const int node = rows[k].node;
      if (node >= static_cast<int>(n) || seen[node])
        throw ConfigError(path + ": slice at t = " + std::to_string(t) +
                          " must cover node ids 0.." + std::to_string(n - 1) +
                          " exactly once");
      seen[node] = 1;
      slice[node] = rows[k].vals;
    }
    out.times.push_back(t);
    out.values.push_back(std::move(slice));
    i = j;
  }
  return out;
}

}  // namespace

NodalVectorSeries load_vector_series_csv(const std::string& path) {
  const CsvRows rows = load_csv(path, "t,node_id,vx,vy", 2);
  std::vector<std::vector<Vec2>> slices;
  slices.reserve(rows.values.size());
  for (const auto& s : rows.values) {
    std::vector<Vec2> slice;
    slice.reserve(s.size());
    for (const auto& v : s) slice.push_back({v[0], v[1]});
    slices.push_back(std::move(slice));
  }
  return NodalVectorSeries::from_slices(rows.times, std::move(slices));
}

NodalScalarSeries load_scalar_series_csv(const std::string& path) {
  const CsvRows rows = load_csv(path, "t,node_id,val", 1);
  std::vector<std::vector<double>> slices;
  slices.reserve(rows.values.size());
  for (const auto& s : rows.values) {
    std::vector<double> slice;
    slice.reserve(s.size());
    for (const auto& v : s) slice.push_back(v[0]);
    slices.push_back(std::move(slice));
  }
  return NodalScalarSeries::from_slices(rows.times, std::move(slices));
}

}  // namespace icevp
