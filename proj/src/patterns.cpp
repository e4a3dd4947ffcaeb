#include "ancod/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "ancod/error.hpp"
#include "ancod/spectral.hpp"

namespace ancod {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

ErasurePattern sample_pattern(int n, int k, Rng& rng) {
  if (k < 1 || k > n) throw DimensionError("pattern sampling needs 0 < k <= n");
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  // Selection sampling: uniform over k-subsets and already sorted.
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, rng);
  return ErasurePattern(std::move(chosen), n);
}

ErasurePattern sample_pattern(int n, int k, std::uint64_t seed) {
  Rng rng = substream(seed, 0);
  return sample_pattern(n, k, rng);
}

std::vector<ErasurePattern> sample_patterns(int n, int k, int count, std::uint64_t seed) {
  std::vector<ErasurePattern> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(i));
    out.push_back(sample_pattern(n, k, rng));
  }
  return out;
}

PatternEnumerator::PatternEnumerator(int n, int k, double guard) : n_(n), k_(k) {
  if (k < 1 || k > n) throw DimensionError("pattern enumeration needs 0 < k <= n");
  const double c = binomial(n, k);
  if (c > guard) {
    std::ostringstream msg;
    msg << "refusing to enumerate C(" << n << ", " << k << ") = " << c << " patterns (guard " << guard << ")";
    throw GuardError(msg.str());
  }
  count_ = static_cast<long long>(c);
  current_.resize(static_cast<std::size_t>(k));
  std::iota(current_.begin(), current_.end(), 0);
}

std::optional<ErasurePattern> PatternEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    return ErasurePattern(current_, n_);
  }
  int i = k_ - 1;
  while (i >= 0 && current_[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
  if (i < 0) {
    done_ = true;
    return std::nullopt;
  }
  ++current_[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k_; ++j) {
    current_[static_cast<std::size_t>(j)] = current_[static_cast<std::size_t>(j) - 1] + 1;
  }
  return ErasurePattern(current_, n_);
}

std::vector<ErasurePattern> enumerate_patterns(int n, int k, double guard) {
  PatternEnumerator it(n, k, guard);
  std::vector<ErasurePattern> out;
  out.reserve(static_cast<std::size_t>(it.count()));
  while (auto p = it.next()) out.push_back(std::move(*p));
  return out;
}

double mlie_term(double eta, int n, int m) {
  return (static_cast<double>(m) / n) * 0.5 * std::log2(eta);
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

IEStats summarize_inverse_energies(std::vector<double> samples, int n, int m, int k, int bins) {
  IEStats s;
  s.n = n;
  s.m = m;
  s.k = k;
  s.samples = std::move(samples);

  std::vector<double> sorted = s.samples;
  std::sort(sorted.begin(), sorted.end());
  s.median = quantile_sorted(sorted, 0.5);
  s.q25 = quantile_sorted(sorted, 0.25);
  s.q75 = quantile_sorted(sorted, 0.75);
  s.min = sorted.empty() ? kInfinity : sorted.front();

  CompensatedSum eta_sum;
  CompensatedSum term_sum;
  CompensatedSum term_sq;
  std::size_t finite = 0;
  for (double v : s.samples) {
    if (!std::isfinite(v)) continue;
    ++finite;
    eta_sum.add(v);
    const double t = mlie_term(v, n, m);
    term_sum.add(t);
    term_sq.add(t * t);
  }
  const double total = static_cast<double>(s.samples.size());
  s.fraction_singular = total > 0 ? static_cast<double>(s.samples.size() - finite) / total : 0.0;
  if (finite > 0) {
    const double nf = static_cast<double>(finite);
    s.mean = eta_sum.value() / nf;
    s.mlie = term_sum.value() / nf;
    if (finite > 1) {
      const double var = std::max(0.0, (term_sq.value() - nf * s.mlie * s.mlie) / (nf - 1.0));
      s.mlie_stderr = std::sqrt(var / nf);
    }
  } else {
    s.mean = kInfinity;
    s.mlie = kInfinity;
  }

  LogHistogram& h = s.log_histogram;
  h.lo = std::log10(static_cast<double>(k) / m) - 0.1;
  h.hi = 6.0;
  h.counts.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  const int nb = static_cast<int>(h.counts.size());
  for (double v : s.samples) {
    if (!std::isfinite(v)) {
      ++h.divergent;
      ++h.counts.back();
      continue;
    }
    const double lv = std::log10(v);
    const int b = std::clamp(static_cast<int>(std::floor((lv - h.lo) / (h.hi - h.lo) * nb)), 0, nb - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return s;
}

IEStats ie_statistics(const Frame& frame, int k, const IEOptions& options) {
  const int n = frame.rows();
  const int m = frame.cols();
  if (k < 1 || k > m) throw DimensionError("ie_statistics needs 1 <= k <= m");
  std::vector<double> samples;
  if (options.mode == StatMode::exhaustive) {
    PatternEnumerator it(n, k, options.guard);
    samples.reserve(static_cast<std::size_t>(it.count()));
    while (auto p = it.next()) samples.push_back(inverse_energy(frame, *p));
  } else {
    if (options.trials < 1) throw DomainError("monte carlo statistics need trials >= 1");
    samples.reserve(static_cast<std::size_t>(options.trials));
    for (int t = 0; t < options.trials; ++t) {
      Rng rng = substream(options.seed, static_cast<std::uint64_t>(t));
      samples.push_back(inverse_energy(frame, sample_pattern(n, k, rng)));
    }
  }
  IEStats s = summarize_inverse_energies(std::move(samples), n, m, k, options.bins);
  s.mode = options.mode;
  s.trials = static_cast<int>(s.samples.size());
  s.seed = options.seed;
  return s;
}

void write_log_histogram_csv(std::ostream& os, const LogHistogram& hist) {
  os << "bin_lo,bin_hi,count\n";
  const int nb = static_cast<int>(hist.counts.size());
  for (int b = 0; b < nb; ++b) {
    os << hist.bin_lo(b) << ',';
    if (b == nb - 1) {
      os << "divergent";
    } else {
      os << hist.bin_hi(b);
    }
    os << ',' << hist.counts[static_cast<std::size_t>(b)] << '\n';
  }
}

nlohmann::json ie_summary_json(const IEStats& s) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  return {
      {"n", s.n},
      {"m", s.m},
      {"k", s.k},
      {"beta", s.beta()},
      {"mean", num(s.mean)},
      {"median", num(s.median)},
      {"q25", num(s.q25)},
      {"q75", num(s.q75)},
      {"min", num(s.min)},
      {"mlie", num(s.mlie)},
      {"mlie_stderr", num(s.mlie_stderr)},
      {"fraction_singular", s.fraction_singular},
      {"mode", s.mode == StatMode::exhaustive ? "exhaustive" : "monte_carlo"},
      {"trials", s.trials},
      {"seed", s.seed},
  };
}

std::vector<DivergenceSummary> square_random_divergence(std::span<const int> k_list, int trials, std::uint64_t seed,
                                                        double zeta) {
  if (trials < 1) throw DomainError("square_random_divergence needs trials >= 1");
  if (!std::is_sorted(k_list.begin(), k_list.end())) throw DomainError("k_list must be ascending");
  std::vector<DivergenceSummary> out;
  for (std::size_t idx = 0; idx < k_list.size(); ++idx) {
    const int k = k_list[idx];
    if (k < 1) throw DimensionError("square matrix size must be positive");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(k));
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
      RealMatrix a(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = normal(rng);
      values.push_back(inverse_energy_of_rows(a, k));
    }
    DivergenceSummary d;
    d.k = k;
    d.trials = trials;
    d.zeta = zeta;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    d.median = quantile_sorted(sorted, 0.5);
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    d.mean = sum.value() / trials;
    d.fraction_at_least =
        static_cast<double>(std::count_if(values.begin(), values.end(), [&](double v) { return v >= 1.0 + zeta; })) /
        trials;
    const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
    d.lower_bound = static_cast<double>(k) * k / two_pi_e;
    d.upper_bound = static_cast<double>(k) * k * k / two_pi_e;
    d.mean_within_bounds = d.mean >= d.lower_bound && d.mean <= d.upper_bound;
    out.push_back(d);
  }
  return out;
}

}  // namespace ancod
