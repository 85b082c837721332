#include "apm/quadrature.hpp"

#include "apm/compensated.hpp"
#include "apm/error.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace apm {

namespace {

struct Panel {
  double a, b, fa, fm, fb, whole;
  int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& options) {
  QuadratureResult result;
  if (a == b) return result;
  constexpr int kInitialPanels = 16;
  std::vector<Panel> stack;
  double coarse = 0.0;
  const double h = (b - a) / kInitialPanels;
  double prev = f(a);
  result.evaluations = 1;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double pa = a + i * h;
    const double pb = i + 1 == kInitialPanels ? b : a + (i + 1) * h;
    const double fm = f(0.5 * (pa + pb));
    const double fb = f(pb);
    result.evaluations += 2;
    const double s = simpson(pa, pb, prev, fm, fb);
    coarse += std::fabs(s);
    stack.push_back({pa, pb, prev, fm, fb, s, 0});
    prev = fb;
  }
  const double tol = options.relative_tolerance * std::max(coarse, 1e-300);

  CompensatedSum total;
  double error = 0.0;
  bool capped = false;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double flm = f(0.5 * (p.a + m));
    const double frm = f(0.5 * (m + p.b));
    result.evaluations += 2;
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double diff = left + right - p.whole;
    const double panel_tol = tol * (p.b - p.a) / (b - a);
    const bool exhausted =
        p.depth >= options.max_depth || result.evaluations >= options.max_evaluations;
    if (std::fabs(diff) <= 15.0 * panel_tol || exhausted) {
      if (std::fabs(diff) > 15.0 * panel_tol) capped = true;
      total += left + right + diff / 15.0;
      error += std::fabs(diff) / 15.0;
      continue;
    }
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, p.depth + 1});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, p.depth + 1});
  }
  result.value = total.value();
  result.error_estimate = error;
  if (!std::isfinite(result.value)) {
    throw QuadratureError("quadrature produced a non-finite value", HUGE_VAL);
  }
  if (capped && error > tol) {
    const double achieved = error / std::max(std::fabs(result.value), 1e-300);
    std::ostringstream msg;
    msg << "adaptive Simpson did not reach relative tolerance " << options.relative_tolerance
        << " (achieved " << achieved << ")";
    throw QuadratureError(msg.str(), achieved);
  }
  return result;
}

}  // namespace apm
