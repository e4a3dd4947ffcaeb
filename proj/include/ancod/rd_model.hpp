#pragma once

#include <cmath>
#include <iosfwd>
#include <vector>

// Rate / distortion bookkeeping for the analog coding scheme. All rates are
// in bits per source sample (log base 2).

namespace ancod {

/// Gaussian RDF with erasure distortion: (p/2) log2 γ.
double rdf(double p, double gamma);

/// Distortion after scalar Wiener estimation: σx²σq² / (σx² + σq²).
double wiener_distortion(double sigma_x2, double sigma_q2);
/// Wiener coefficient σx² / (σx² + σq²).
double wiener_alpha(double sigma_x2, double sigma_q2);
/// γ = σx² / D for the Wiener distortion.
double sdr_from_noise(double sigma_x2, double sigma_q2);
/// σq² that yields SDR γ at source variance σx² (γ > 1).
double noise_for_sdr(double sigma_x2, double gamma);

/// (m/n)(1/2) log2(1 + η(γ - 1)); +inf when η is infinite.
double scheme_rate(int n, int m, double eta, double gamma);

struct ExcessRate {
  double exact = 0.0;      ///< δ = (p/2)[β log2(ηγ + 1 - η) - log2 γ]
  double high_res = 0.0;   ///< β(p/2) log2 η + (β - 1)(p/2) log2 γ
  bool high_res_valid = false;  ///< γ ≫ 1 (taken as γ ≥ 100)
};

ExcessRate excess_rate(double p, double beta, double gamma, double eta);

/// Binary entropy H_b(p) in bits.
double si_benchmark(double p);
/// (1/n) log2 C(n, k).
double si_benchmark_finite(int n, int k);

/// Excess rate of an i.i.d. transform, η = 1/(β-1) substituted.
double random_transform_excess(double p, double beta, double gamma);

struct BetaOptimum {
  double beta = 0.0;
  double delta = 0.0;
};

/// Minimizes random_transform_excess over β ∈ (1, 1/p]. Golden-section
/// search seeded by a dense grid so a non-unimodal objective is still caught.
BetaOptimum optimize_beta(double p, double gamma);

/// (p/2) log2(ln γ); requires γ > e.
double high_sdr_asymptote(double p, double gamma);

inline double db_to_gamma(double db) { return std::pow(10.0, db / 10.0); }
inline double gamma_to_db(double gamma) { return 10.0 * std::log10(gamma); }

struct RDPoint {
  double p = 0.0;
  double beta = 0.0;
  double gamma_db = 0.0;
  double eta = 0.0;
  double rate_bits = 0.0;
  double rdf_bits = 0.0;
  double delta_bits = 0.0;
  double si_bits = 0.0;
};

/// Fill an RDPoint for a concrete (n, m, k) frame geometry at SDR γ.
RDPoint make_rd_point(int n, int m, int k, double eta, double gamma);

void write_rd_points_csv(std::ostream& os, const std::vector<RDPoint>& points);

}  // namespace ancod
