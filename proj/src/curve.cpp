#include "crossings/curve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "crossings/error.hpp"
#include "crossings/expr.hpp"

namespace crossings {
namespace {

struct ExprHolder {
  expr::NodePtr node;
  double operator()(double s) const { return expr::eval(*node, s); }
};

std::function<double(double)> wrap(std::string_view text, std::string_view var) {
  auto holder = std::make_shared<ExprHolder>();
  holder->node = expr::parse(text, var);
  return [holder](double s) { return (*holder)(s); };
}

}  // namespace

CurveSpec CurveSpec::from_expressions(std::string_view psi, std::string_view psi_dot,
                                      std::optional<std::string> gamma) {
  CurveSpec c;
  c.psi_ = wrap(psi, "s");
  c.psi_dot_ = wrap(psi_dot, "s");
  if (gamma) c.gamma_ = wrap(*gamma, "h");
  c.label_ = "psi(s) = " + std::string(psi);
  return c;
}

CurveSpec CurveSpec::from_callables(std::function<double(double)> psi,
                                    std::function<double(double)> psi_dot,
                                    std::function<double(double)> gamma, std::string label) {
  CurveSpec c;
  c.psi_ = std::move(psi);
  c.psi_dot_ = std::move(psi_dot);
  c.gamma_ = std::move(gamma);
  c.label_ = std::move(label);
  return c;
}

CurveSpec CurveSpec::constant(double x) {
  CurveSpec c;
  c.psi_ = [x](double) { return x; };
  c.psi_dot_ = [](double) { return 0.0; };
  c.gamma_ = [](double) { return 0.0; };
  c.constant_level_ = x;
  c.label_ = "level " + std::to_string(x);
  return c;
}

double CurveSpec::gamma(double h) const {
  if (gamma_) return gamma_(h);
  if (gamma_h_.empty())
    throw Error(ErrorKind::Domain, "no modulus of continuity: supply gamma or estimate it");
  // table is ascending in h; clamp below resolution, step up conservatively
  auto it = std::lower_bound(gamma_h_.begin(), gamma_h_.end(), h);
  if (it == gamma_h_.end()) return gamma_v_.back();
  return gamma_v_[static_cast<std::size_t>(it - gamma_h_.begin())];
}

void CurveSpec::estimate_gamma(double delta) {
  if (gamma_) return;  // closed form wins
  const int n = 4096;
  const double spacing = delta / (n - 1);
  std::vector<double> dpsi(n);
  for (int i = 0; i < n; ++i) dpsi[static_cast<std::size_t>(i)] = psi_dot_(i * spacing);

  // 64 dyadic-rational window widths m delta/64 plus the dyadic powers
  // delta 2^-k down to the resolvable spacing
  std::vector<double> hs;
  for (int m = 1; m <= 64; ++m) hs.push_back(delta * m / 64.0);
  for (int k = 1; k <= 63; ++k) {
    double h = delta * std::pow(2.0, -k);
    if (h < 2.0 * spacing) break;
    hs.push_back(h);
  }
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());

  gamma_h_.clear();
  gamma_v_.clear();
  for (double h : hs) {
    int w = std::max(1, static_cast<int>(std::floor(h / spacing)));
    // sliding range over windows of w+1 samples via monotone deques
    std::deque<int> mx, mn;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      while (!mx.empty() && dpsi[static_cast<std::size_t>(mx.back())] <=
                                 dpsi[static_cast<std::size_t>(i)])
        mx.pop_back();
      mx.push_back(i);
      while (!mn.empty() && dpsi[static_cast<std::size_t>(mn.back())] >=
                                 dpsi[static_cast<std::size_t>(i)])
        mn.pop_back();
      mn.push_back(i);
      if (mx.front() < i - w) mx.pop_front();
      if (mn.front() < i - w) mn.pop_front();
      if (i >= w)
        best = std::max(best, dpsi[static_cast<std::size_t>(mx.front())] -
                                  dpsi[static_cast<std::size_t>(mn.front())]);
    }
    gamma_h_.push_back(h);
    gamma_v_.push_back(best);
  }
  // enforce monotonicity against sampling wiggle
  for (std::size_t i = 1; i < gamma_v_.size(); ++i)
    gamma_v_[i] = std::max(gamma_v_[i], gamma_v_[i - 1]);
}

void CurveSpec::validate_derivative(double span) const {
  const int checks = 128;
  const double h = std::max(1e-6, span * 1e-6);
  for (int i = 0; i <= checks; ++i) {
    double s = span * i / checks;
    double fd = (psi_(s - 2 * h) - 8 * psi_(s - h) + 8 * psi_(s + h) - psi_(s + 2 * h)) / (12 * h);
    double stated = psi_dot_(s);
    double scale = std::max({1.0, std::abs(fd), std::abs(stated)});
    if (std::abs(stated - fd) / scale > 1e-5)
      throw Error(ErrorKind::Validation,
                  "psi_dot(" + std::to_string(s) + ") = " + std::to_string(stated) +
                      " disagrees with the finite difference " + std::to_string(fd));
  }
}

}  // namespace crossings
