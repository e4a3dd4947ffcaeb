#pragma once

// Brute-force reference computations used only by the test suites. Nothing
// here calls into the library's numerical paths.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// (1/m) tr((SS')^{-1}) by explicit full-pivoting LU inversion.
template <class Mat>
double inverse_energy_explicit(const Mat& sub, int m) {
  using Scalar = typename Mat::Scalar;
  using Square = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Square gram = sub * sub.adjoint();
  const Square inv = Eigen::FullPivLU<Square>(gram).inverse();
  return std::real(inv.trace()) / m;
}

/// Pseudo-inverse by SVD with no rank cutoff.
template <class Mat>
Mat pinv_svd(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Mat sinv = Mat::Zero(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i) sinv(i, i) = 1.0 / s(i);
  return svd.matrixV() * sinv * svd.matrixU().adjoint();
}

/// Composite midpoint rule; crude but entirely independent of the library quadrature.
inline double midpoint(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

/// Midpoint rule in θ after x = c - h cos θ, for densities with square-root edges.
inline double midpoint_semicircle(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  return midpoint([&](double t) { return f(c - h * std::cos(t)) * h * std::sin(t); }, 0.0, std::numbers::pi, panels);
}

/// Central finite difference.
inline double central_difference(const std::function<double(double)>& f, double step) {
  return (f(step) - f(-step)) / (2.0 * step);
}

/// Number of (a, b) pairs of distinct elements with (a - b) mod n == d, by
/// scanning every residue for every pair.
inline std::vector<int> difference_histogram(const std::vector<int>& elements, int n) {
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (std::size_t j = 0; j < elements.size(); ++j) {
      if (i == j) continue;
      for (int d = 0; d < n; ++d) {
        if ((elements[j] + d) % n == elements[i] % n) ++counts[static_cast<std::size_t>(d)];
      }
    }
  }
  return counts;
}

/// Direct IDFT entry exp(2πi t f / n)/sqrt(m) with no modular reduction.
inline std::complex<double> idft_entry(int t, int f, int n, int m) {
  return std::polar(1.0 / std::sqrt(static_cast<double>(m)), 2.0 * std::numbers::pi * t * f / n);
}

}  // namespace oracle
