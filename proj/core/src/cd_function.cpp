#include "curvlab/cd_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace curvlab {

CdFunction CdFunction::power(double nu, double gamma) {
  if (!(nu > 0.0)) throw std::invalid_argument("power CD-function needs nu > 0");
  CdFunction f;
  f.family_ = Family::Power;
  f.nu_ = nu;
  f.gamma_ = gamma;
  return f;
}

CdFunction CdFunction::two_regime(double c, double gamma, double x0, double a) {
  if (!(c > 0.0) || !(x0 > 0.0) || !(a > 0.0))
    throw std::invalid_argument("two_regime CD-function needs c, x0, a > 0");
  CdFunction f;
  f.family_ = Family::TwoRegime;
  f.nu_ = c;
  f.gamma_ = gamma;
  f.x0_ = x0;
  f.a_ = a;
  return f;
}

CdFunction CdFunction::tabulated(std::vector<double> x, std::vector<double> f,
                                 double gamma_low, double a_high) {
  if (x.size() != f.size() || x.size() < 2)
    throw std::invalid_argument("tabulated CD-function needs >= 2 nodes");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(f[i] > 0.0))
      throw std::invalid_argument("tabulated CD-function nodes must be positive");
    if (i > 0 && x[i] <= x[i - 1])
      throw std::invalid_argument("tabulated CD-function nodes must be strictly increasing");
  }
  CdFunction g;
  g.family_ = Family::Tabulated;
  g.tx_ = std::move(x);
  g.tf_ = std::move(f);
  g.gamma_low_ = gamma_low;
  g.a_high_ = a_high;
  return g;
}

double CdFunction::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  switch (family_) {
    case Family::Power:
      return nu_ * std::pow(x, gamma_);
    case Family::TwoRegime:
      if (x <= x0_) return nu_ * std::pow(x, gamma_);
      return nu_ * std::pow(x0_, gamma_) * std::exp(a_ * (x - x0_));
    case Family::Tabulated: {
      if (x <= tx_.front()) return tf_.front() * std::pow(x / tx_.front(), gamma_low_);
      if (x >= tx_.back()) return tf_.back() * std::exp(a_high_ * (x - tx_.back()));
      const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
      const double lt = (std::log(x) - std::log(tx_[i])) / (std::log(tx_[i + 1]) - std::log(tx_[i]));
      return std::exp((1.0 - lt) * std::log(tf_[i]) + lt * std::log(tf_[i + 1]));
    }
  }
  return 0.0;
}

double CdFunction::log_value(double x) const {
  if (!(x > 0.0)) throw std::domain_error("log_value needs x > 0");
  switch (family_) {
    case Family::Power:
      return std::log(nu_) + gamma_ * std::log(x);
    case Family::TwoRegime:
      if (x <= x0_) return std::log(nu_) + gamma_ * std::log(x);
      return std::log(nu_) + gamma_ * std::log(x0_) + a_ * (x - x0_);
    case Family::Tabulated: {
      if (x <= tx_.front())
        return std::log(tf_.front()) + gamma_low_ * (std::log(x) - std::log(tx_.front()));
      if (x >= tx_.back()) return std::log(tf_.back()) + a_high_ * (x - tx_.back());
      const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - tx_.begin()) - 1;
      const double lt = (std::log(x) - std::log(tx_[i])) / (std::log(tx_[i + 1]) - std::log(tx_[i]));
      return (1.0 - lt) * std::log(tf_[i]) + lt * std::log(tf_[i + 1]);
    }
  }
  return 0.0;
}

double CdFunction::small_x_exponent() const {
  return family_ == Family::Tabulated ? gamma_low_ : gamma_;
}

double CdFunction::small_x_coefficient() const {
  if (family_ == Family::Tabulated) return tf_.front() / std::pow(tx_.front(), gamma_low_);
  return nu_;
}

void CdFunction::validate() const {
  // integrability of 1/F at infinity, per family
  switch (family_) {
    case Family::Power:
      if (!(gamma_ > 1.0))
        throw std::invalid_argument("power CD-function needs gamma > 1 for 1/F integrability");
      break;
    case Family::TwoRegime:
    case Family::Tabulated:
      // exponential upper branch; always integrable
      if (family_ == Family::Tabulated && !(a_high_ > 0.0))
        throw std::invalid_argument("tabulated CD-function needs a_high > 0");
      if (family_ == Family::TwoRegime && !(a_ > 0.0))
        throw std::invalid_argument("two_regime CD-function needs a > 0");
      break;
  }
  // F(0) = 0 and strict ratio monotonicity on a log grid; log-space keeps the
  // exponential branch inside double range out to x = 1e8
  if ((*this)(0.0) != 0.0) throw std::invalid_argument("CD-function must vanish at 0");
  const int kGrid = 200;
  double prev_log_ratio = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double x = std::pow(10.0, -8.0 + 16.0 * i / (kGrid - 1));
    const double lfx = log_value(x);
    if (std::isnan(lfx)) throw std::invalid_argument("CD-function must be finite and nonnegative");
    const double log_ratio = lfx - std::log(x);
    if (!(log_ratio > prev_log_ratio))
      throw std::invalid_argument("CD-function ratio F(x)/x is not strictly increasing");
    prev_log_ratio = log_ratio;
  }
}

nlohmann::json CdFunction::to_json() const {
  nlohmann::json j;
  switch (family_) {
    case Family::Power:
      j["family"] = "power";
      j["nu"] = nu_;
      j["gamma"] = gamma_;
      break;
    case Family::TwoRegime:
      j["family"] = "two_regime";
      j["c"] = nu_;
      j["gamma"] = gamma_;
      j["x0"] = x0_;
      j["a"] = a_;
      break;
    case Family::Tabulated:
      j["family"] = "tabulated";
      j["x"] = tx_;
      j["f"] = tf_;
      j["gamma_low"] = gamma_low_;
      j["a_high"] = a_high_;
      break;
  }
  return j;
}

CdFunction CdFunction::from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "power") return power(j.at("nu").get<double>(), j.at("gamma").get<double>());
  if (fam == "two_regime")
    return two_regime(j.at("c").get<double>(), j.at("gamma").get<double>(),
                      j.at("x0").get<double>(), j.at("a").get<double>());
  if (fam == "tabulated")
    return tabulated(j.at("x").get<std::vector<double>>(), j.at("f").get<std::vector<double>>(),
                     j.at("gamma_low").get<double>(), j.at("a_high").get<double>());
  throw std::invalid_argument("unknown CD-function family: " + fam);
}

CdFunction fit_envelope(std::span<const std::pair<double, double>> wz, const EnvelopeOptions& opts) {
  std::vector<std::pair<double, double>> pos;
  pos.reserve(wz.size());
  for (const auto& [w, z] : wz)
    if (w > 0.0 && z > 0.0 && std::isfinite(w) && std::isfinite(z)) pos.emplace_back(w, z);
  if (static_cast<int>(pos.size()) < opts.min_positive_samples)
    throw std::invalid_argument("fit_envelope: fewer than the required positive-w samples");

  // trim the w-range to well-covered quantiles; isolated extreme-w samples
  // come from near-cancellation of Lf and carry unrepresentative minima
  std::vector<double> ws;
  ws.reserve(pos.size());
  for (const auto& [w, z] : pos) ws.push_back(w);
  std::sort(ws.begin(), ws.end());
  const double w_lo = ws[static_cast<std::size_t>(0.02 * (ws.size() - 1))];
  const double w_hi = ws[static_cast<std::size_t>(0.98 * (ws.size() - 1))];

  // log-binned per-bin minima
  const double bw = 1.0 / opts.bins_per_decade;
  std::map<long, double> bins;  // bin index -> min z
  for (const auto& [w, z] : pos) {
    if (w < w_lo || w > w_hi) continue;
    const long b = static_cast<long>(std::floor(std::log10(w) / bw));
    auto it = bins.find(b);
    if (it == bins.end() || z < it->second) bins[b] = z;
  }
  if (bins.size() < 3) throw std::invalid_argument("fit_envelope: not enough populated bins");

  std::vector<double> xs, fs;
  for (const auto& [b, zmin] : bins) {
    xs.push_back(std::pow(10.0, (b + 0.5) * bw));
    fs.push_back(zmin * opts.safety);
  }

  // conservative isotonic pass on the ratio F/x: suffix minimum (only lowers
  // values), then a tiny downward ramp on earlier bins to make it strict
  const int m = static_cast<int>(xs.size());
  std::vector<double> ratio(m);
  for (int i = 0; i < m; ++i) ratio[i] = fs[i] / xs[i];
  for (int i = m - 2; i >= 0; --i) ratio[i] = std::min(ratio[i], ratio[i + 1]);
  for (int i = 0; i < m; ++i) ratio[i] *= 1.0 - 1e-9 * (m - i);
  for (int i = 0; i < m; ++i) fs[i] = ratio[i] * xs[i];

  // power fit on the lowest populated decade of bins (log-log least squares)
  auto loglog_fit = [](std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
      const double lx = std::log(x[i]), ly = std::log(y[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double inter = (sy - slope * sx) / n;
    return std::pair<double, double>(slope, inter);
  };

  int lo_end = 1;
  while (lo_end < m && xs[lo_end] < 10.0 * xs.front()) ++lo_end;
  lo_end = std::max(lo_end, 2);
  auto [gamma_low, c_log] = loglog_fit(std::span(xs).first(lo_end), std::span(fs).first(lo_end));
  (void)c_log;
  gamma_low = std::max(gamma_low, 1.05);  // keep the low branch a valid CD ratio

  // exponential fit z ~ A e^{a w} on the highest populated decade
  int hi_start = m - 2;
  while (hi_start > 0 && xs[hi_start] > 0.1 * xs.back()) --hi_start;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = hi_start; i < m; ++i) {
    sx += xs[i];
    sy += std::log(fs[i]);
    sxx += xs[i] * xs[i];
    sxy += xs[i] * std::log(fs[i]);
    ++cnt;
  }
  double a_high = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  a_high = std::max(a_high, 1.0000001 / xs.back());  // ratio must keep increasing past the seam

  CdFunction env = CdFunction::tabulated(xs, fs, gamma_low, a_high);
  env.validate();
  return env;
}

}  // namespace curvlab
