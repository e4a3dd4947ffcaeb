#include "ancod/rd_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "ancod/error.hpp"

namespace ancod {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double rdf(double p, double gamma) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("rdf needs p in (0, 1]");
  if (!(gamma > 0.0)) throw DomainError("rdf needs gamma > 0");
  return 0.5 * p * std::log2(gamma);
}

double wiener_distortion(double sigma_x2, double sigma_q2) {
  if (!(sigma_x2 > 0.0 && sigma_q2 > 0.0)) throw DomainError("variances must be positive");
  if (std::isinf(sigma_q2)) return sigma_x2;
  return sigma_x2 * sigma_q2 / (sigma_x2 + sigma_q2);
}

double wiener_alpha(double sigma_x2, double sigma_q2) {
  if (!(sigma_x2 > 0.0 && sigma_q2 > 0.0)) throw DomainError("variances must be positive");
  if (std::isinf(sigma_q2)) return 0.0;
  return sigma_x2 / (sigma_x2 + sigma_q2);
}

double sdr_from_noise(double sigma_x2, double sigma_q2) {
  return sigma_x2 / wiener_distortion(sigma_x2, sigma_q2);
}

double noise_for_sdr(double sigma_x2, double gamma) {
  if (!(gamma > 1.0)) throw DomainError("SDR must exceed 1 for a finite quantization noise");
  // D = σx²/γ and D = σx²σq²/(σx²+σq²)  =>  σq² = σx²/(γ-1).
  return sigma_x2 / (gamma - 1.0);
}

double scheme_rate(int n, int m, double eta, double gamma) {
  if (n < 1 || m < 1 || m > n) throw DomainError("scheme_rate needs 1 <= m <= n");
  if (!(gamma >= 1.0)) throw DomainError("scheme_rate needs gamma >= 1");
  if (std::isinf(eta)) return kInf;
  const double arg = 1.0 + eta * (gamma - 1.0);
  if (!(arg > 0.0)) throw DomainError("scheme_rate: 1 + eta(gamma-1) must be positive");
  return (static_cast<double>(m) / n) * 0.5 * std::log2(arg);
}

ExcessRate excess_rate(double p, double beta, double gamma, double eta) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("excess_rate needs p in (0, 1]");
  if (!(beta >= 1.0)) throw DomainError("excess_rate needs beta >= 1");
  if (!(gamma > 0.0)) throw DomainError("excess_rate needs gamma > 0");
  ExcessRate r;
  r.high_res_valid = gamma >= 100.0;
  if (std::isinf(eta)) {
    r.exact = kInf;
    r.high_res = kInf;
    return r;
  }
  const double arg = eta * gamma + (1.0 - eta);
  if (!(arg > 0.0)) throw DomainError("excess_rate: eta*gamma + 1 - eta must be positive");
  r.exact = 0.5 * p * (beta * std::log2(arg) - std::log2(gamma));
  r.high_res = beta * 0.5 * p * std::log2(eta) + (beta - 1.0) * 0.5 * p * std::log2(gamma);
  return r;
}

double si_benchmark(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("si_benchmark needs p in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double si_benchmark_finite(int n, int k) {
  if (!(k > 0 && k < n)) throw DomainError("si_benchmark_finite needs 0 < k < n");
  const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return log_binom / std::numbers::ln2 / n;
}

double random_transform_excess(double p, double beta, double gamma) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("random_transform_excess needs p in (0, 1)");
  if (!(gamma > 1.0)) throw DomainError("random_transform_excess needs gamma > 1");
  if (!(beta > 1.0)) return kInf;
  if (beta > 1.0 / p * (1.0 + 1e-12)) throw DomainError("random_transform_excess needs beta <= 1/p");
  // ηγ + 1 - η with η = 1/(β-1) equals 1 + (γ-1)/(β-1).
  return 0.5 * p * (beta * std::log2(1.0 + (gamma - 1.0) / (beta - 1.0)) - std::log2(gamma));
}

BetaOptimum optimize_beta(double p, double gamma) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("optimize_beta: admissible beta interval (1, 1/p] is empty");
  const double hi = 1.0 / p;
  auto f = [&](double b) { return random_transform_excess(p, b, gamma); };

  constexpr int kGrid = 10000;
  int best = 1;
  double best_val = kInf;
  auto grid = [&](int i) { return 1.0 + (hi - 1.0) * i / kGrid; };
  for (int i = 1; i <= kGrid; ++i) {
    const double v = f(grid(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = grid(best - 1);
  double b = grid(std::min(best + 1, kGrid));
  if (best == 1) a = 1.0 + (grid(1) - 1.0) * 1e-6;

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-9) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  BetaOptimum out;
  out.beta = 0.5 * (a + b);
  out.delta = f(out.beta);
  if (best_val < out.delta) {
    out.beta = grid(best);
    out.delta = best_val;
  }
  return out;
}

double high_sdr_asymptote(double p, double gamma) {
  if (!(gamma >= std::numbers::e)) throw DomainError("high_sdr_asymptote needs gamma >= e");
  return 0.5 * p * std::log2(std::log(gamma));
}

RDPoint make_rd_point(int n, int m, int k, double eta, double gamma) {
  RDPoint pt;
  pt.p = static_cast<double>(k) / n;
  pt.beta = static_cast<double>(m) / k;
  pt.gamma_db = gamma_to_db(gamma);
  pt.eta = eta;
  pt.rate_bits = scheme_rate(n, m, eta, gamma);
  pt.rdf_bits = rdf(pt.p, gamma);
  pt.delta_bits = excess_rate(pt.p, pt.beta, gamma, eta).exact;
  pt.si_bits = pt.p < 1.0 ? si_benchmark(pt.p) : 0.0;
  return pt;
}

void write_rd_points_csv(std::ostream& os, const std::vector<RDPoint>& points) {
  os << "p,beta,gamma_db,eta,rate_bits,rdf_bits,delta_bits,si_bits\n";
  for (const auto& pt : points) {
    os << pt.p << ',' << pt.beta << ',' << pt.gamma_db << ',' << pt.eta << ',' << pt.rate_bits << ',' << pt.rdf_bits
       << ',' << pt.delta_bits << ',' << pt.si_bits << '\n';
  }
}

}  // namespace ancod
