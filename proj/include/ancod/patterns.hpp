#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "ancod/frame.hpp"
#include "ancod/pattern.hpp"
#include "ancod/rng.hpp"

namespace ancod {

/// Largest C(n, k) that exhaustive enumeration accepts by default.
inline constexpr double kEnumerationGuard = 1e6;

/// C(n, k) as a double (exact up to 2^53).
double binomial(int n, int k);

/// Uniform k-subset of {0, ..., n-1}, sorted.
ErasurePattern sample_pattern(int n, int k, Rng& rng);
ErasurePattern sample_pattern(int n, int k, std::uint64_t seed);

/// `count` patterns; pattern i is drawn from substream(seed, i).
std::vector<ErasurePattern> sample_patterns(int n, int k, int count, std::uint64_t seed);

/// Lexicographic walk over all k-subsets of {0, ..., n-1}.
class PatternEnumerator {
 public:
  /// Throws GuardError when C(n, k) exceeds `guard`.
  PatternEnumerator(int n, int k, double guard = kEnumerationGuard);

  /// Next pattern, or nullopt once every subset has been produced.
  std::optional<ErasurePattern> next();
  [[nodiscard]] long long count() const { return count_; }

 private:
  int n_;
  int k_;
  long long count_;
  std::vector<int> current_;
  bool started_ = false;
  bool done_ = false;
};

std::vector<ErasurePattern> enumerate_patterns(int n, int k, double guard = kEnumerationGuard);

enum class StatMode { exhaustive, monte_carlo };

struct IEOptions {
  StatMode mode = StatMode::monte_carlo;
  int trials = 2000;
  std::uint64_t seed = 0;
  int bins = 60;
  double guard = kEnumerationGuard;
};

/// Histogram over log10 η. Values past `hi` and singular patterns land in the top bin.
struct LogHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<long long> counts;
  long long divergent = 0;  ///< +inf samples (also counted in the top bin)

  [[nodiscard]] double bin_lo(int b) const { return lo + (hi - lo) * b / static_cast<double>(counts.size()); }
  [[nodiscard]] double bin_hi(int b) const { return lo + (hi - lo) * (b + 1) / static_cast<double>(counts.size()); }
};

struct IEStats {
  int n = 0;
  int m = 0;
  int k = 0;
  std::vector<double> samples;  ///< η_s per pattern, +inf for singular ones
  double mean = 0.0;            ///< over finite samples
  double median = 0.0;          ///< over all samples, +inf sorting last
  double q25 = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double fraction_singular = 0.0;
  double mlie = 0.0;         ///< mean of (m/n)(1/2)log2 η over finite samples, bits
  double mlie_stderr = 0.0;  ///< standard error of that mean
  LogHistogram log_histogram;
  StatMode mode = StatMode::monte_carlo;
  int trials = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] double beta() const { return static_cast<double>(m) / k; }
  [[nodiscard]] double iqr() const { return q75 - q25; }
};

/// Inverse-energy statistics over all C(n, k) patterns (exhaustive) or over
/// `trials` uniform patterns (monte_carlo).
IEStats ie_statistics(const Frame& frame, int k, const IEOptions& options = {});

/// Summary statistics for an explicit set of η samples.
IEStats summarize_inverse_energies(std::vector<double> samples, int n, int m, int k, int bins = 60);

/// Per-pattern MLIE term (m/n)(1/2)log2 η in bits.
double mlie_term(double eta, int n, int m);

void write_log_histogram_csv(std::ostream& os, const LogHistogram& hist);
nlohmann::json ie_summary_json(const IEStats& stats);

struct DivergenceSummary {
  int k = 0;
  int trials = 0;
  double mean = 0.0;
  double median = 0.0;
  double zeta = 1.0;
  double fraction_at_least = 0.0;  ///< fraction of trials with value ≥ 1 + ζ
  double lower_bound = 0.0;        ///< k²/(2πe)
  double upper_bound = 0.0;        ///< k³/(2πe)
  bool mean_within_bounds = false;
};

/// (1/k) tr((A A')^{-1}) for square k x k real i.i.d. N(0, 1/k) matrices.
std::vector<DivergenceSummary> square_random_divergence(std::span<const int> k_list, int trials, std::uint64_t seed,
                                                        double zeta = 1.0);

}  // namespace ancod
