#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace d2dlab {

// Adaptive Gauss-Legendre integration. Each panel is evaluated with the
// 15-point Kronrod extension of the 7-point Legendre rule; the difference
// between the two estimates drives the panel error, and the worst panel is
// bisected until the summed error meets the tolerance.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

namespace quad_detail {

// Nodes/weights of the (G7, K15) pair on [-1, 1]. Positive nodes only; the
// rule is symmetric.
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

template <typename F>
inline std::pair<double, double> panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double gauss = kWg[3] * fv[7];
  for (int i = 0; i < 3; ++i) gauss += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  double kron = kWgk[7] * fv[7];
  for (int i = 0; i < 7; ++i) kron += kWgk[i] * (fv[i] + fv[14 - i]);
  return {kron * h, std::fabs((kron - gauss) * h)};
}

}  // namespace quad_detail

template <typename F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-8,
                     double abs_tol = 0.0) {
  struct Panel {
    double a, b, value, error;
  };
  if (!(a < b)) return {0.0, 0.0, 0};

  auto [v0, e0] = quad_detail::panel(f, a, b);
  std::vector<Panel> panels{{a, b, v0, e0}};
  double value = v0, error = e0;

  // Bisect the worst panel until the error target is met. The panel cap only
  // exists to stop runaway subdivision on pathological integrands.
  const std::size_t kMaxPanels = 4096;
  while (error > std::max(abs_tol, rel_tol * std::fabs(value)) &&
         panels.size() < kMaxPanels) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < panels.size(); ++i)
      if (panels[i].error > panels[worst].error) worst = i;
    Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    if (mid <= p.a || mid >= p.b) break;  // interval no longer splittable
    auto [vl, el] = quad_detail::panel(f, p.a, mid);
    auto [vr, er] = quad_detail::panel(f, mid, p.b);
    value += vl + vr - p.value;
    error += el + er - p.error;
    panels[worst] = {p.a, mid, vl, el};
    panels.push_back({mid, p.b, vr, er});
  }

  return {value, error, static_cast<int>(panels.size())};
}

}  // namespace d2dlab
