#include "ancod/frame.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ancod/error.hpp"
#include "ancod/rng.hpp"

namespace ancod {

namespace {

constexpr std::string_view kKindNames[] = {"bandlimited_dft", "random_iid", "dft_spectrum",
                                           "dss",             "paley_etf",  "custom"};

}  // namespace

std::string_view to_string(Field f) { return f == Field::real ? "real" : "complex"; }

std::string_view to_string(FrameKind k) { return kKindNames[static_cast<int>(k)]; }

Field parse_field(std::string_view s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  throw FormatError("unknown field '" + std::string(s) + "'");
}

FrameKind parse_frame_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == s) return static_cast<FrameKind>(i);
  }
  throw FormatError("unknown frame kind '" + std::string(s) + "'");
}

ErasurePattern::ErasurePattern(std::vector<int> indices, int n) : indices_(std::move(indices)), n_(n) {
  if (indices_.empty()) throw DimensionError("erasure pattern must contain at least one index");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= n_) {
      throw DimensionError("pattern index " + std::to_string(indices_[i]) + " outside [0, " + std::to_string(n_) + ")");
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw DimensionError("pattern indices must be strictly increasing");
    }
  }
}

Frame::Frame(RealMatrix data, FrameKind kind, std::optional<std::vector<int>> spectrum,
             std::optional<std::uint64_t> seed)
    : data_(std::move(data)), kind_(kind), spectrum_(std::move(spectrum)), seed_(seed) {
  validate();
}

Frame::Frame(ComplexMatrix data, FrameKind kind, std::optional<std::vector<int>> spectrum,
             std::optional<std::uint64_t> seed)
    : data_(std::move(data)), kind_(kind), spectrum_(std::move(spectrum)), seed_(seed) {
  validate();
}

int Frame::rows() const {
  return visit([](const auto& a) { return static_cast<int>(a.rows()); });
}

int Frame::cols() const {
  return visit([](const auto& a) { return static_cast<int>(a.cols()); });
}

void Frame::validate() const {
  const int n = rows();
  const int m = cols();
  if (m < 1 || n < m) {
    throw DimensionError("frame must satisfy n >= m >= 1 (got n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  if (spectrum_) {
    if (static_cast<int>(spectrum_->size()) != m) throw DimensionError("spectrum size must equal m");
    std::vector<int> sorted = *spectrum_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DimensionError("spectrum indices must be distinct");
    }
    if (sorted.front() < 0 || sorted.back() >= n) throw DimensionError("spectrum index out of range");
  }
}

ComplexMatrix Frame::as_complex() const {
  return visit([](const auto& a) -> ComplexMatrix { return a.template cast<Complex>(); });
}

double Frame::max_row_norm_deviation() const {
  return visit([](const auto& a) { return (a.rowwise().norm().array() - 1.0).abs().maxCoeff(); });
}

Frame Frame::normalized() const {
  const bool unit = max_row_norm_deviation() < 1e-12;
  return visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    Mat out = a;
    out.rowwise().normalize();
    return Frame(std::move(out), unit ? kind_ : FrameKind::custom, unit ? spectrum_ : std::nullopt, seed_);
  });
}

bool operator==(const Frame& lhs, const Frame& rhs) {
  if (lhs.kind_ != rhs.kind_ || lhs.spectrum_ != rhs.spectrum_ || lhs.seed_ != rhs.seed_) return false;
  if (lhs.data_.index() != rhs.data_.index() || lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) return false;
  return std::visit(
      [&](const auto& a) {
        using Mat = std::decay_t<decltype(a)>;
        return a.cwiseEqual(std::get<Mat>(rhs.data_)).all();
      },
      lhs.data_);
}

namespace {

ComplexMatrix idft_columns(int n, const std::vector<int>& freqs) {
  const int m = static_cast<int>(freqs.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  ComplexMatrix a(n, m);
  for (int j = 0; j < m; ++j) {
    for (int t = 0; t < n; ++t) {
      // Reduce t*f mod n in integers so the phase stays exact for large n.
      const long long r = (static_cast<long long>(t) * freqs[static_cast<std::size_t>(j)]) % n;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / n;
      a(t, j) = scale * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return a;
}

}  // namespace

Frame build_bandlimited_dft(int n, int m) {
  if (m < 1 || m > n) {
    throw DimensionError("band-limited DFT needs 1 <= m <= n (got n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  std::vector<int> freqs(static_cast<std::size_t>(m));
  for (int f = 0; f < m; ++f) freqs[static_cast<std::size_t>(f)] = f;
  return Frame(idft_columns(n, freqs), FrameKind::bandlimited_dft, freqs);
}

Frame build_random_iid(int n, int m, Field field, std::uint64_t seed) {
  if (m < 1 || m > n) throw DimensionError("random frame needs 1 <= m <= n");
  Rng rng = substream(seed, 0, 0x11d);
  if (field == Field::real) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
    RealMatrix a(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = normal(rng);
    return Frame(std::move(a), FrameKind::random_iid, std::nullopt, seed);
  }
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0 * m));
  ComplexMatrix a(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      a(i, j) = Complex(re, im);
    }
  return Frame(std::move(a), FrameKind::random_iid, std::nullopt, seed);
}

Frame build_dft_spectrum(int n, std::vector<int> spectrum) {
  if (spectrum.empty() || static_cast<int>(spectrum.size()) > n) {
    throw DimensionError("spectrum must hold between 1 and n indices");
  }
  for (int f : spectrum) {
    if (f < 0 || f >= n) throw DimensionError("spectrum index " + std::to_string(f) + " outside [0, n)");
  }
  {
    std::vector<int> sorted = spectrum;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DimensionError("duplicate spectrum index");
    }
  }
  ComplexMatrix a = idft_columns(n, spectrum);
  return Frame(std::move(a), FrameKind::dft_spectrum, std::move(spectrum));
}

Frame build_random_spectrum(int n, int m, std::uint64_t seed) {
  if (m < 1 || m > n) throw DimensionError("random spectrum needs 1 <= m <= n");
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::vector<int> spectrum;
  spectrum.reserve(static_cast<std::size_t>(m));
  Rng rng = substream(seed, 0, 0x5bec);
  std::sample(all.begin(), all.end(), std::back_inserter(spectrum), m, rng);
  ComplexMatrix a = idft_columns(n, spectrum);
  return Frame(std::move(a), FrameKind::dft_spectrum, std::move(spectrum), seed);
}

bool is_prime(long long v) {
  if (v < 2) return false;
  if (v % 2 == 0) return v == 2;
  for (long long d = 3; d * d <= v; d += 2) {
    if (v % d == 0) return false;
  }
  return true;
}

DifferenceSet quadratic_difference_set(int p) {
  if (!is_prime(p)) throw ConstructionError("quadratic difference set: p=" + std::to_string(p) + " is not prime");
  if (p % 4 != 3) throw ConstructionError("quadratic difference set: p=" + std::to_string(p) + " is not 3 mod 4");
  DifferenceSet ds;
  ds.n = p;
  ds.m = (p - 1) / 2;
  ds.lambda = (p - 3) / 4;
  std::vector<bool> hit(static_cast<std::size_t>(p), false);
  for (long long i = 1; i <= ds.m; ++i) hit[static_cast<std::size_t>((i * i) % p)] = true;
  for (int r = 1; r < p; ++r)
    if (hit[static_cast<std::size_t>(r)]) ds.elements.push_back(r);
  return ds;
}

std::vector<int> difference_counts(const DifferenceSet& ds) {
  std::vector<int> counts(static_cast<std::size_t>(ds.n), 0);
  for (int a : ds.elements)
    for (int b : ds.elements)
      if (a != b) ++counts[static_cast<std::size_t>(((a - b) % ds.n + ds.n) % ds.n)];
  return counts;
}

bool is_difference_set(const DifferenceSet& ds) {
  if (static_cast<int>(ds.elements.size()) != ds.m) return false;
  if (static_cast<long long>(ds.lambda) * (ds.n - 1) != static_cast<long long>(ds.m) * (ds.m - 1)) return false;
  const auto counts = difference_counts(ds);
  if (counts[0] != 0) return false;
  return std::all_of(counts.begin() + 1, counts.end(), [&](int c) { return c == ds.lambda; });
}

Frame build_dss(int p) {
  const DifferenceSet ds = quadratic_difference_set(p);
  ComplexMatrix a = idft_columns(p, ds.elements);
  return Frame(std::move(a), FrameKind::dss, ds.elements);
}

RealMatrix paley_conference_matrix(int n) {
  const int q = n - 1;
  if (n < 2 || !is_prime(q) || q % 4 != 1) {
    throw ConstructionError("no supported conference matrix of order " + std::to_string(n) +
                            " (need n-1 prime and n-1 = 1 mod 4)");
  }
  // Legendre symbol of every residue, via the squares.
  std::vector<int> chi(static_cast<std::size_t>(q), -1);
  chi[0] = 0;
  for (long long i = 1; i <= (q - 1) / 2; ++i) chi[static_cast<std::size_t>((i * i) % q)] = 1;

  RealMatrix c = RealMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    c(0, i) = 1.0;
    c(i, 0) = 1.0;
    for (int j = 1; j < n; ++j) {
      if (i != j) c(i, j) = chi[static_cast<std::size_t>(((i - j) % q + q) % q)];
    }
  }
  return c;
}

Frame build_paley_etf(int n) {
  const RealMatrix c = paley_conference_matrix(n);
  const RealMatrix gram = RealMatrix::Identity(n, n) + c / std::sqrt(static_cast<double>(n - 1));
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
  if (eig.info() != Eigen::Success) throw ConstructionError("eigendecomposition of the Paley Gram failed");
  const int m = n / 2;
  // Eigenvalues are ascending: n/2 zeros then n/2 twos.
  RealMatrix a = eig.eigenvectors().rightCols(m) * eig.eigenvalues().tail(m).cwiseSqrt().asDiagonal();
  a.rowwise().normalize();
  return Frame(std::move(a), FrameKind::paley_etf);
}

double welch_bound(int n, int m) {
  if (n <= 1) return 0.0;
  return std::sqrt(static_cast<double>(n - m) / (static_cast<double>(n - 1) * m));
}

ETFReport verify_etf(const Frame& frame, double tol) {
  const int n = frame.rows();
  const int m = frame.cols();
  ETFReport r;
  r.welch_bound = welch_bound(n, m);
  frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    const Mat frame_op = a.adjoint() * a;
    const Mat target = Mat::Identity(m, m) * (static_cast<double>(n) / m);
    r.tightness_error = (frame_op - target).cwiseAbs().maxCoeff();
    const Mat gram = a * a.adjoint();
    r.coherence_min = std::numeric_limits<double>::infinity();
    r.coherence_max = 0.0;
    r.max_welch_deviation = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double c = std::abs(gram(i, j));
        r.coherence_min = std::min(r.coherence_min, c);
        r.coherence_max = std::max(r.coherence_max, c);
        r.max_welch_deviation = std::max(r.max_welch_deviation, std::abs(c - r.welch_bound));
      }
    }
    if (n == 1) r.coherence_min = 0.0;
  });
  r.is_tight = r.tightness_error <= tol;
  r.is_equiangular = r.max_welch_deviation <= tol;
  return r;
}

SparkReport full_spark_check(const Frame& frame, std::span<const ErasurePattern> patterns, double rel_tol) {
  SparkReport report;
  report.smallest = std::numeric_limits<double>::infinity();
  frame.visit([&](const auto& a) {
    for (const auto& pattern : patterns) {
      if (pattern.universe() != frame.rows()) throw DimensionError("pattern universe does not match frame rows");
      if (pattern.size() > frame.cols()) throw DimensionError("pattern larger than frame dimension m");
      const auto sub = pattern_rows(a, pattern);
      Eigen::JacobiSVD<std::decay_t<decltype(sub)>> svd(sub);
      const auto& sv = svd.singularValues();
      const double smin = sv(sv.size() - 1);
      const bool deficient = smin <= rel_tol * sv(0);
      report.min_singular_values.push_back(smin);
      report.rank_deficient.push_back(deficient);
      report.deficient_count += deficient ? 1 : 0;
      report.smallest = std::min(report.smallest, smin);
    }
  });
  return report;
}

}  // namespace ancod
