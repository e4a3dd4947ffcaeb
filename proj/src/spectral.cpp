#include "ancod/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ancod/error.hpp"
#include "ancod/patterns.hpp"

namespace ancod {

namespace {

void check_pattern(const Frame& frame, const ErasurePattern& pattern) {
  if (pattern.universe() != frame.rows()) throw DimensionError("pattern universe does not match frame rows");
  if (pattern.size() > frame.cols()) throw DimensionError("pattern size k exceeds frame dimension m");
}

template <class Mat>
Eigen::VectorXd gram_spectrum(const Mat& sub) {
  using Scalar = typename Mat::Scalar;
  using Square = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Square gram = sub * sub.adjoint();
  Eigen::SelfAdjointEigenSolver<Square> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SingularError("Hermitian eigensolver did not converge");
  return eig.eigenvalues();
}

double eta_from_eigenvalues(const Eigen::VectorXd& lambda, int m) {
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();
  if (!(lmin > kSingularRatio * lmax)) return kInfinity;
  return lambda.cwiseInverse().sum() / m;
}

}  // namespace

EigenSample gram_eigenvalues(const Frame& frame, const ErasurePattern& pattern) {
  check_pattern(frame, pattern);
  const Eigen::VectorXd lambda = frame.visit([&](const auto& a) { return gram_spectrum(pattern_rows(a, pattern)); });
  EigenSample out;
  out.eigenvalues.assign(lambda.data(), lambda.data() + lambda.size());
  out.pattern = pattern;
  out.eta = eta_from_eigenvalues(lambda, frame.cols());
  return out;
}

double inverse_energy(const Frame& frame, const ErasurePattern& pattern) {
  check_pattern(frame, pattern);
  const int m = frame.cols();
  return frame.visit([&](const auto& a) { return inverse_energy_of_rows(pattern_rows(a, pattern), m); });
}

// Quadrature ----------------------------------------------------------------

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

double integrate_semicircle_weighted(const std::function<double(double)>& g, Support support, double a, double b,
                                     double rel_tol) {
  a = std::max(a, support.lo);
  b = std::min(b, support.hi);
  if (!(b > a)) return 0.0;
  const double c = 0.5 * (support.lo + support.hi);
  const double h = 0.5 * (support.hi - support.lo);
  // x = c - h cos θ maps [0, π] onto [lo, hi]; sqrt((x-lo)(hi-x)) = h sin θ.
  const double ta = std::acos(std::clamp((c - a) / h, -1.0, 1.0));
  const double tb = std::acos(std::clamp((c - b) / h, -1.0, 1.0));
  auto integrand = [&](double t) {
    const double s = std::sin(t);
    return g(c - h * std::cos(t)) * h * h * s * s;
  };
  return integrate(integrand, ta, tb, rel_tol);
}

// Marchenko–Pastur ----------------------------------------------------------

Support mp_support(double beta) {
  if (!(beta >= 1.0)) throw DomainError("Marchenko-Pastur law needs beta >= 1");
  const double r = std::sqrt(1.0 / beta);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

double mp_density(double x, double beta) {
  const Support s = mp_support(beta);
  if (x <= s.lo || x >= s.hi) return 0.0;
  const double ratio = 1.0 / beta;
  return std::sqrt((s.hi - x) * (x - s.lo)) / (2.0 * std::numbers::pi * ratio * x);
}

double mp_eta_limit(double beta) {
  if (!(beta > 1.0)) return kInfinity;
  return 1.0 / (beta - 1.0);
}

// MANOVA --------------------------------------------------------------------

Support manova_support(double m_over_n, double beta) {
  if (!(m_over_n > 0.0 && m_over_n < 1.0)) throw DomainError("MANOVA law needs 0 < m/n < 1");
  if (!(beta >= 1.0)) throw DomainError("MANOVA law needs beta >= 1");
  const double u = std::sqrt((1.0 - m_over_n) / beta);
  const double v = std::sqrt(1.0 - m_over_n / beta);
  return {(u - v) * (u - v), (u + v) * (u + v)};
}

double manova_density(double x, double m_over_n, double beta) {
  const Support s = manova_support(m_over_n, beta);
  if (x <= s.lo || x >= s.hi) return 0.0;
  return beta * std::sqrt((x - s.lo) * (s.hi - x)) / (2.0 * std::numbers::pi * x * (1.0 - m_over_n * x));
}

Atom manova_atom(double m_over_n, double beta) {
  manova_support(m_over_n, beta);
  const double p = m_over_n / beta;
  return {1.0 / m_over_n, std::max(0.0, (p + m_over_n - 1.0) / p)};
}

double manova_eta_limit(double beta, double m_over_n) {
  if (!(beta > 1.0)) return kInfinity;
  const Support s = manova_support(m_over_n, beta);
  // (1/β) ∫ f(x)/x dx with the square-root factor absorbed by the substitution.
  auto g = [&](double x) { return 1.0 / (2.0 * std::numbers::pi * x * x * (1.0 - m_over_n * x)); };
  const Atom atom = manova_atom(m_over_n, beta);
  return integrate_semicircle_weighted(g, s, s.lo, s.hi, 1e-10) + atom.weight / (beta * atom.location);
}

double manova_eta_limit_centered(double beta) {
  if (!(beta > 1.0)) return kInfinity;
  const double c = std::sqrt((1.0 / beta) * (2.0 - 1.0 / beta));
  auto g = [](double x) { return 1.0 / (std::numbers::pi * x * x * (2.0 - x)); };
  return integrate_semicircle_weighted(g, {1.0 - c, 1.0 + c}, 1.0 - c, 1.0 + c, 1e-10);
}

DensityCurve DensityCurve::marchenko_pastur(double beta) {
  return DensityCurve(DensityKind::marchenko_pastur, beta, 0.0, mp_support(beta));
}

DensityCurve DensityCurve::manova(double m_over_n, double beta) {
  return DensityCurve(DensityKind::manova, beta, m_over_n, manova_support(m_over_n, beta));
}

double DensityCurve::operator()(double x) const {
  return kind_ == DensityKind::marchenko_pastur ? mp_density(x, beta_) : manova_density(x, m_over_n_, beta_);
}

double DensityCurve::mass(double a, double b) const {
  if (kind_ == DensityKind::marchenko_pastur) {
    const double ratio = 1.0 / beta_;
    auto g = [ratio](double x) { return 1.0 / (2.0 * std::numbers::pi * ratio * x); };
    return integrate_semicircle_weighted(g, support_, a, b, 1e-10);
  }
  const double beta = beta_;
  const double mn = m_over_n_;
  auto g = [beta, mn](double x) { return beta / (2.0 * std::numbers::pi * x * (1.0 - mn * x)); };
  const Atom atom = manova_atom(mn, beta);
  const double point = (atom.weight > 0.0 && a < atom.location && atom.location <= b) ? atom.weight : 0.0;
  return integrate_semicircle_weighted(g, support_, a, b, 1e-10) + point;
}

// Empirical spectra ---------------------------------------------------------

std::vector<double> pooled_gram_eigenvalues(const Frame& frame, int k, int trials, std::uint64_t seed) {
  if (k < 1 || k > frame.cols()) throw DimensionError("eigen histogram needs 1 <= k <= m");
  if (trials < 1) throw DomainError("eigen histogram needs trials >= 1");
  const int n = frame.rows();
  std::vector<double> pooled;
  pooled.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(t));
    const ErasurePattern pattern = sample_pattern(n, k, rng);
    const Eigen::VectorXd lambda = frame.visit([&](const auto& a) { return gram_spectrum(pattern_rows(a, pattern)); });
    pooled.insert(pooled.end(), lambda.data(), lambda.data() + lambda.size());
  }
  return pooled;
}

EigenHistogram histogram_of_eigenvalues(std::span<const double> pooled, int bins, double upper) {
  if (pooled.empty()) throw DomainError("eigen histogram needs at least one eigenvalue");
  if (bins < 1) throw DomainError("eigen histogram needs bins >= 1");
  if (!(upper > 0.0)) throw DomainError("eigen histogram upper edge must be positive");
  EigenHistogram hist;
  hist.sample_count = static_cast<long long>(pooled.size());
  hist.min_eigenvalue = *std::min_element(pooled.begin(), pooled.end());
  hist.max_eigenvalue = *std::max_element(pooled.begin(), pooled.end());
  hist.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) hist.edges[static_cast<std::size_t>(b)] = upper * b / bins;
  std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
  for (double v : pooled) {
    if (v > upper) continue;
    const int b = std::clamp(static_cast<int>(std::floor(v / upper * bins)), 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double width = upper / bins;
  hist.density.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    hist.density[static_cast<std::size_t>(b)] =
        static_cast<double>(counts[static_cast<std::size_t>(b)]) / (static_cast<double>(hist.sample_count) * width);
  }
  return hist;
}

EigenHistogram eigen_histogram(const Frame& frame, int k, int trials, int bins, std::uint64_t seed,
                               std::optional<double> upper) {
  if (bins < 1) throw DomainError("eigen histogram needs bins >= 1");
  const std::vector<double> pooled = pooled_gram_eigenvalues(frame, k, trials, seed);
  const double largest = *std::max_element(pooled.begin(), pooled.end());
  const double hi = upper.value_or(std::max(static_cast<double>(frame.rows()) / frame.cols(), largest));
  EigenHistogram hist = histogram_of_eigenvalues(pooled, bins, hi);
  hist.k = k;
  hist.trials = trials;
  hist.seed = seed;
  return hist;
}

double l1_distance(const EigenHistogram& hist, const DensityCurve& reference) {
  const double w = hist.width();
  double total = 0.0;
  for (int b = 0; b < hist.bins(); ++b) {
    const double ref = reference.mass(hist.edges[static_cast<std::size_t>(b)], hist.edges[static_cast<std::size_t>(b) + 1]);
    total += std::abs(hist.density[static_cast<std::size_t>(b)] * w - ref);
  }
  total += reference.mass(hist.edges.back(), reference.support().hi);
  return total;
}

void write_eigen_histogram_csv(std::ostream& os, const EigenHistogram& hist, std::span<const NamedDensity> references,
                               double max_center) {
  os << "bin_center,empirical_density";
  for (const auto& r : references) {
    os << ',' << (references.size() == 1 ? std::string("reference") : r.name) << "_density";
  }
  os << '\n';
  const double w = hist.width();
  for (int b = 0; b < hist.bins(); ++b) {
    const double center = hist.center(b);
    if (center > max_center) break;
    os << center << ',' << hist.density[static_cast<std::size_t>(b)];
    for (const auto& r : references) {
      os << ',' << r.curve.mass(hist.edges[static_cast<std::size_t>(b)], hist.edges[static_cast<std::size_t>(b) + 1]) / w;
    }
    os << '\n';
  }
}

}  // namespace ancod
