#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "photon_shaper/errors.hpp"

// Fourth-order quadrature on uniform grids. Integrals are expressed as
// h * sum_k w_k f_k with w_k = 1 away from the ends; end_corrections() visits
// the nodes whose weight differs from one, so long weighted sums can be done as
// a plain sum plus a handful of fix-ups.
namespace photon::quad {

namespace detail {
inline constexpr std::array<double, 3> kGregoryEnd = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
}

/// Weight (in units of h) of node k in the closed rule over m nodes.
/// m = 2 trapezoid, 3 Simpson, 4 Simpson 3/8, 5 Boole, m >= 6 Gregory with
/// second-difference end corrections.
inline double node_weight(std::size_t k, std::size_t m) {
  switch (m) {
    case 0:
    case 1: return 0.0;
    case 2: return 0.5;
    case 3: return k == 1 ? 4.0 / 3.0 : 1.0 / 3.0;
    case 4: return (k == 0 || k == 3) ? 3.0 / 8.0 : 9.0 / 8.0;
    case 5: {
      constexpr std::array<double, 5> boole = {14.0 / 45.0, 64.0 / 45.0, 24.0 / 45.0, 64.0 / 45.0,
                                               14.0 / 45.0};
      return boole[k];
    }
    default:
      if (k < 3) return detail::kGregoryEnd[k];
      if (k + 3 >= m) return detail::kGregoryEnd[m - 1 - k];
      return 1.0;
  }
}

/// Calls visit(k, w_k - 1) for every node whose weight differs from one.
template <typename Visit>
void end_corrections(std::size_t m, Visit&& visit) {
  if (m <= 5) {
    for (std::size_t k = 0; k < m; ++k) visit(k, node_weight(k, m) - 1.0);
    return;
  }
  for (std::size_t k = 0; k < 3; ++k) visit(k, detail::kGregoryEnd[k] - 1.0);
  for (std::size_t k = m - 3; k < m; ++k) visit(k, detail::kGregoryEnd[m - 1 - k] - 1.0);
}

template <typename T>
T integrate(std::span<const T> f, double h) {
  T sum{};
  for (const auto& v : f) sum += v;
  end_corrections(f.size(), [&](std::size_t k, double dw) { sum += dw * f[k]; });
  return h * sum;
}

template <typename T>
T integrate(const std::vector<T>& f, double h) {
  return integrate(std::span<const T>(f), h);
}

/// out[j] = integral of f over [t_0, t_j], each one a full fourth-order rule on
/// nodes 0..j. O(n) through prefix sums.
template <typename T>
std::vector<T> cumulative(std::span<const T> f, double h) {
  std::vector<T> out(f.size(), T{});
  T prefix{};
  for (std::size_t j = 0; j < f.size(); ++j) {
    prefix += f[j];
    T sum = prefix;
    end_corrections(j + 1, [&](std::size_t k, double dw) { sum += dw * f[k]; });
    out[j] = h * sum;
  }
  return out;
}

template <typename T>
std::vector<T> cumulative(const std::vector<T>& f, double h) {
  return cumulative(std::span<const T>(f), h);
}

/// y[j] = integral_0^{t_j} f(t') exp(a (t_j - t')) dt' by the recursion
/// y[j+1] = e^{a h} y[j] + (local piece), where the local piece integrates the
/// cubic through four neighbouring nodes of f(t') exp(a (t_{j+1} - t')).
inline std::vector<std::complex<double>> exp_window_convolve(
    std::span<const std::complex<double>> f, std::complex<double> a, double h) {
  using C = std::complex<double>;
  const std::size_t n = f.size();
  std::vector<C> y(n, C{});
  if (n < 2) return y;
  // shift[m + 2] = exp(a m h) for m = -2..3
  std::array<C, 6> shift;
  for (int m = -2; m <= 3; ++m) shift[m + 2] = std::exp(a * (static_cast<double>(m) * h));
  auto g = [&](std::size_t k, std::size_t j1) {  // f_k exp(a (t_{j1} - t_k))
    const int m = static_cast<int>(j1) - static_cast<int>(k);
    return f[k] * shift[m + 2];
  };
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t j1 = j + 1;
    C local;
    if (n < 4) {
      local = 0.5 * h * (g(j, j1) + g(j1, j1));
    } else if (j == 0) {
      local = h / 24.0 * (9.0 * g(0, 1) + 19.0 * g(1, 1) - 5.0 * g(2, 1) + g(3, 1));
    } else if (j + 2 == n) {
      local = h / 24.0 * (g(n - 4, j1) - 5.0 * g(n - 3, j1) + 19.0 * g(n - 2, j1) + 9.0 * g(n - 1, j1));
    } else {
      local = h / 24.0 * (-g(j - 1, j1) + 13.0 * g(j, j1) + 13.0 * g(j1, j1) - g(j + 2, j1));
    }
    y[j1] = shift[3] * y[j] + local;
  }
  return y;
}

inline std::vector<std::complex<double>> exp_window_convolve(
    const std::vector<std::complex<double>>& f, std::complex<double> a, double h) {
  return exp_window_convolve(std::span<const std::complex<double>>(f), a, h);
}

/// Centered differences in the interior, second-order one-sided at the ends.
template <typename T>
std::vector<T> derivative(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  std::vector<T> d(n, T{});
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (f[1] - f[0]) / h;
    return d;
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

template <typename T>
std::vector<T> derivative(const std::vector<T>& f, double h) {
  return derivative(std::span<const T>(f), h);
}

/// Fourth-order differences: five-point centered stencil in the interior,
/// one-sided five-point stencils on the two nodes nearest each end.
template <typename T>
std::vector<T> derivative4(std::span<const T> f, double h) {
  const std::size_t n = f.size();
  if (n < 5) return derivative(f, h);
  std::vector<T> d(n, T{});
  const double s = 1.0 / (12.0 * h);
  d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  for (std::size_t j = 2; j + 2 < n; ++j) d[j] = s * (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]);
  d[n - 2] = s * (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]);
  d[n - 1] = s * (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]);
  return d;
}

template <typename T>
std::vector<T> derivative4(const std::vector<T>& f, double h) {
  return derivative4(std::span<const T>(f), h);
}

}  // namespace photon::quad
