#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ancod/frame.hpp"
#include "ancod/pattern.hpp"

namespace ancod {

/// λ_min ≤ kSingularRatio · λ_max marks A_sA_s' as singular.
inline constexpr double kSingularRatio = 1e-12;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct EigenSample {
  std::vector<double> eigenvalues;  ///< ascending
  ErasurePattern pattern;
  double eta = 0.0;  ///< +inf when singular
};

/// Eigenvalues of the k x k Gram A_sA_s' and the inverse energy they imply.
EigenSample gram_eigenvalues(const Frame& frame, const ErasurePattern& pattern);

/// η_s = (1/m) tr((A_sA_s')^{-1}) through a Cholesky factorization.
/// Returns +inf when the Gram is not numerically positive definite.
double inverse_energy(const Frame& frame, const ErasurePattern& pattern);

/// (1/m) tr((SS')^{-1}) for an explicit k x m block S.
template <class Mat>
double inverse_energy_of_rows(const Mat& sub, int m) {
  using Scalar = typename Mat::Scalar;
  using Square = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Square gram = sub * sub.adjoint();
  Eigen::LLT<Square> llt(gram);
  if (llt.info() != Eigen::Success) return kInfinity;
  const auto k = gram.rows();
  const Square linv = llt.matrixL().solve(Square::Identity(k, k));
  // tr(G^{-1}) = ‖L^{-1}‖_F² and λ_max ≤ tr(G), so a condition-number proxy
  // of tr(G)·tr(G^{-1}) catches every Gram with λ_min ≤ kSingularRatio·λ_max.
  const double trace_inv = linv.squaredNorm();
  const double trace = std::real(gram.trace());
  if (!std::isfinite(trace_inv) || trace_inv * trace >= 1.0 / kSingularRatio) return kInfinity;
  return trace_inv / m;
}

// Limiting densities -------------------------------------------------------

struct Support {
  double lo = 0.0;
  double hi = 0.0;
};

/// Edges (1 ± sqrt(1/β))² of the Marchenko–Pastur law of A_sA_s' for an
/// i.i.d. frame with entry variance 1/m and β = m/k ≥ 1.
Support mp_support(double beta);
double mp_density(double x, double beta);
/// 1/(β-1) for β > 1, +inf otherwise.
double mp_eta_limit(double beta);

/// Edges of the MANOVA (Jacobi) law of A_sA_s' for a random-spectrum DFT frame.
Support manova_support(double m_over_n, double beta);
/// Absolutely continuous part of the MANOVA law.
double manova_density(double x, double m_over_n, double beta);

/// Point mass of the MANOVA law. When k + m > n a fraction (p + m/n - 1)/p of
/// the eigenvalues sits exactly at n/m; otherwise weight is 0.
struct Atom {
  double location = 0.0;
  double weight = 0.0;
};
Atom manova_atom(double m_over_n, double beta);

/// (1/β) E[1/λ] under the MANOVA law, continuous part plus atom. +inf for β ≤ 1.
double manova_eta_limit(double beta, double m_over_n = 0.5);
/// Same limit at m/n = 1/2 evaluated through the centered semicircle-type
/// integrand with half-width c = sqrt((1/β)(2 - 1/β)).
double manova_eta_limit_centered(double beta);

enum class DensityKind { marchenko_pastur, manova };

/// A limiting eigenvalue density together with its parameters.
class DensityCurve {
 public:
  static DensityCurve marchenko_pastur(double beta);
  static DensityCurve manova(double m_over_n, double beta);

  [[nodiscard]] DensityKind kind() const { return kind_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double m_over_n() const { return m_over_n_; }
  [[nodiscard]] Support support() const { return support_; }
  [[nodiscard]] double operator()(double x) const;
  /// Probability of (a, b], including any point mass.
  [[nodiscard]] double mass(double a, double b) const;
  [[nodiscard]] double total_mass() const { return mass(support_.lo - 1.0, support_.hi + 1.0 / m_over_n_ + 1.0); }

 private:
  DensityCurve(DensityKind kind, double beta, double m_over_n, Support support)
      : kind_(kind), beta_(beta), m_over_n_(m_over_n), support_(support) {}

  DensityKind kind_;
  double beta_;
  double m_over_n_;
  Support support_;
};

/// Adaptive Gauss–Kronrod integral of f over [a, b] to the given relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10);

/// ∫ g(x) sqrt((x - lo)(hi - x)) dx over [a, b] ⊂ [lo, hi] after the change of
/// variables x = c - h cos θ, which removes the square-root edges.
double integrate_semicircle_weighted(const std::function<double(double)>& g, Support support, double a, double b,
                                     double rel_tol = 1e-10);

// Empirical spectra --------------------------------------------------------

struct EigenHistogram {
  std::vector<double> edges;    ///< bins + 1 ascending edges, edges.front() == 0
  std::vector<double> density;  ///< normalized so Σ density·width = 1
  long long sample_count = 0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  int k = 0;
  int trials = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] int bins() const { return static_cast<int>(density.size()); }
  [[nodiscard]] double width() const { return edges[1] - edges[0]; }
  [[nodiscard]] double center(int b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// Eigenvalues of A_sA_s' pooled over `trials` uniform k-patterns; pattern t
/// is drawn from substream(seed, t).
std::vector<double> pooled_gram_eigenvalues(const Frame& frame, int k, int trials, std::uint64_t seed);

/// Uniform histogram of pooled eigenvalues on [0, upper]. Values above upper
/// are dropped but still count toward the normalization.
EigenHistogram histogram_of_eigenvalues(std::span<const double> pooled, int bins, double upper);

/// Pool the eigenvalues of A_sA_s' over `trials` uniform k-patterns and bin
/// them uniformly on [0, upper]. upper defaults to max(n/m, largest sampled
/// eigenvalue) so no sample is clipped.
EigenHistogram eigen_histogram(const Frame& frame, int k, int trials, int bins, std::uint64_t seed,
                               std::optional<double> upper = std::nullopt);

/// Σ_b |p̂_b - P_b| where p̂_b is the empirical bin mass and P_b the reference
/// mass of the same bin; reference mass outside the histogram range is added.
double l1_distance(const EigenHistogram& hist, const DensityCurve& reference);

struct NamedDensity {
  std::string name;
  DensityCurve curve;
};

/// CSV with columns bin_center, empirical_density and one bin-averaged
/// reference column per overlay: `reference_density` for a single overlay,
/// `<name>_density` otherwise. Bins whose center exceeds `max_center` are skipped.
void write_eigen_histogram_csv(std::ostream& os, const EigenHistogram& hist, std::span<const NamedDensity> references,
                               double max_center = kInfinity);

}  // namespace ancod
