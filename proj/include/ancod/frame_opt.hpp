#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ancod/frame.hpp"
#include "ancod/pattern.hpp"
#include "ancod/patterns.hpp"
#include "ancod/rng.hpp"

namespace ancod {

/// ρ̂ = mean over `patterns` of (m/n)(1/2) log2 η_s, in bits. +inf if any
/// pattern is singular.
double mlie_objective(const Frame& frame, std::span<const ErasurePattern> patterns);

/// Euclidean gradient of mlie_objective with respect to the frame entries.
/// For complex frames the real part holds ∂/∂Re and the imaginary part
/// ∂/∂Im of each entry. Throws SingularError on a singular pattern.
Frame::Storage mlie_gradient(const Frame& frame, std::span<const ErasurePattern> patterns);

/// Removes from each row of g its component along the matching (unit) row of
/// a, in the real inner product Re⟨a_i, g_i⟩.
template <class Mat>
Mat tangent_projection(const Mat& a, const Mat& g) {
  Mat out = g;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double along = std::real(a.row(i).dot(g.row(i))) / a.row(i).squaredNorm();
    out.row(i) -= along * a.row(i);
  }
  return out;
}

/// Frobenius norm of the gradient after tangent projection.
double projected_gradient_norm(const Frame& frame, const Frame::Storage& gradient);

/// Random point at per-row tangent distance ε: Gaussian noise per row,
/// orthogonalized against the row, scaled to norm ε, then re-projected to
/// unit rows. Real frames get real noise, complex frames complex noise.
Frame perturb_on_manifold(const Frame& frame, double epsilon, Rng& rng);

struct StepRecord {
  int iteration = 0;
  double mlie = 0.0;
  double step = 0.0;
};

struct PerturbationVerdict {
  double epsilon = 0.0;
  int trials = 0;
  double fraction_decreased = 0.0;  ///< decrease larger than the noise floor
  double max_decrease = 0.0;        ///< largest base - perturbed, bits (negative if all increased)
  std::vector<double> deltas;       ///< perturbed - base per trial

  /// Fraction of trials whose MLIE dropped by more than `threshold` bits.
  [[nodiscard]] double fraction_decreased_by(double threshold) const;
};

struct OptReport {
  double initial_mlie = 0.0;
  double final_mlie = 0.0;
  int iterations = 0;
  std::vector<StepRecord> step_history;
  bool converged = false;
  std::vector<PerturbationVerdict> perturbation_verdicts;
  int pattern_count = 0;
  bool exhaustive = false;
  /// MLIE on an independent pattern sample (sampled runs only; NaN otherwise).
  double fresh_initial_mlie = 0.0;
  double fresh_final_mlie = 0.0;
};

struct LocalSearchOptions {
  /// Exhaustive objective when C(n, k) fits, otherwise this many sampled patterns.
  int pattern_budget = 2000;
  int max_iterations = 200;
  double initial_step = 1e-2;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  double gradient_tol = 1e-10;
  double mlie_tol = 1e-15;
};

struct LocalSearchResult {
  OptReport report;
  Frame frame;
};

/// Projected gradient descent with Armijo backtracking on the unit-row manifold.
LocalSearchResult local_search(const Frame& init, int k, const LocalSearchOptions& options, std::uint64_t seed);

struct VerifyOptions {
  StatMode mode = StatMode::exhaustive;
  int mc_patterns = 2000;
  double guard = kEnumerationGuard;
  double noise_floor = 1e-12;
};

/// Perturbation test of local minimality of the MLIE.
OptReport verify_local_min(const Frame& frame, int k, std::span<const double> epsilons, int trials,
                           std::uint64_t seed, const VerifyOptions& options = {});

void write_trajectory_csv(std::ostream& os, const OptReport& report);

}  // namespace ancod
