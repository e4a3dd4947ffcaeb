#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ancod/pattern.hpp"

namespace ancod {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

enum class Field { real, complex };
enum class FrameKind { bandlimited_dft, random_iid, dft_spectrum, dss, paley_etf, custom };

std::string_view to_string(Field f);
std::string_view to_string(FrameKind k);
Field parse_field(std::string_view s);
FrameKind parse_frame_kind(std::string_view s);

/// n x m frame; rows are the frame elements. Immutable once built.
///
/// Storage is real or complex depending on the field. Algorithms that work on
/// both walk the matrix through visit(), which hands the concrete Eigen type to
/// a generic lambda.
class Frame {
 public:
  using Storage = std::variant<RealMatrix, ComplexMatrix>;

  Frame(RealMatrix data, FrameKind kind, std::optional<std::vector<int>> spectrum = std::nullopt,
        std::optional<std::uint64_t> seed = std::nullopt);
  Frame(ComplexMatrix data, FrameKind kind, std::optional<std::vector<int>> spectrum = std::nullopt,
        std::optional<std::uint64_t> seed = std::nullopt);

  [[nodiscard]] int rows() const;
  [[nodiscard]] int cols() const;
  [[nodiscard]] Field field() const { return std::holds_alternative<RealMatrix>(data_) ? Field::real : Field::complex; }
  [[nodiscard]] FrameKind kind() const { return kind_; }
  [[nodiscard]] const std::optional<std::vector<int>>& spectrum() const { return spectrum_; }
  [[nodiscard]] const std::optional<std::uint64_t>& seed() const { return seed_; }
  [[nodiscard]] const Storage& data() const { return data_; }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), data_);
  }

  /// Copy promoted to complex storage.
  [[nodiscard]] ComplexMatrix as_complex() const;
  /// Largest |‖A_i‖ - 1| over rows.
  [[nodiscard]] double max_row_norm_deviation() const;
  /// Same frame with rows rescaled to unit l2 norm; kind becomes `custom`
  /// unless the input already had unit rows.
  [[nodiscard]] Frame normalized() const;

  /// Exact equality of metadata and every stored value.
  friend bool operator==(const Frame& lhs, const Frame& rhs);

 private:
  void validate() const;

  Storage data_;
  FrameKind kind_;
  std::optional<std::vector<int>> spectrum_;
  std::optional<std::uint64_t> seed_;
};

/// First m columns of the n-point IDFT, scaled by 1/sqrt(m).
Frame build_bandlimited_dft(int n, int m);

/// Entries i.i.d. N(0, 1/m) (real) or circular complex with the same
/// variance. Rows are not renormalized.
Frame build_random_iid(int n, int m, Field field, std::uint64_t seed);

/// IDFT columns at the given (distinct, in-range) frequencies, scaled by
/// 1/sqrt(|spectrum|). Order of the spectrum is preserved.
Frame build_dft_spectrum(int n, std::vector<int> spectrum);

/// DFT frame restricted to a uniformly drawn m-subset of frequencies.
Frame build_random_spectrum(int n, int m, std::uint64_t seed);

/// (n, m, λ) cyclic difference set.
struct DifferenceSet {
  int n = 0;
  int m = 0;
  int lambda = 0;
  std::vector<int> elements;
};

/// Quadratic residues mod p; requires p prime and p ≡ 3 (mod 4).
DifferenceSet quadratic_difference_set(int p);

/// counts[d] = number of ordered pairs (a, b), a != b, with a - b ≡ d (mod n).
std::vector<int> difference_counts(const DifferenceSet& ds);

/// True iff λ(n-1) = m(m-1) and every nonzero residue occurs exactly λ times.
bool is_difference_set(const DifferenceSet& ds);

/// DFT frame on the quadratic difference set of prime p; kind dss.
Frame build_dss(int p);

/// Symmetric conference matrix of order q+1 (q prime, q ≡ 1 mod 4) by the
/// Legendre-symbol construction.
RealMatrix paley_conference_matrix(int n);

/// Real n x n/2 equiangular tight frame obtained by factoring the Gram
/// I + C/sqrt(n-1) of the Paley conference matrix C.
Frame build_paley_etf(int n);

struct ETFReport {
  bool is_tight = false;
  double tightness_error = 0.0;  ///< max |(A'A - (n/m) I)_ij|
  bool is_equiangular = false;
  double coherence_min = 0.0;
  double coherence_max = 0.0;
  double welch_bound = 0.0;
  double max_welch_deviation = 0.0;
};

double welch_bound(int n, int m);

/// Tightness and equiangularity diagnostics. Never throws on non-ETF input.
ETFReport verify_etf(const Frame& frame, double tol = 1e-10);

struct SparkReport {
  std::vector<double> min_singular_values;
  std::vector<bool> rank_deficient;
  int deficient_count = 0;
  double smallest = 0.0;
};

/// Smallest singular value of A_s per pattern. A pattern is flagged when
/// σ_min ≤ rel_tol · σ_max(A_s).
SparkReport full_spark_check(const Frame& frame, std::span<const ErasurePattern> patterns,
                             double rel_tol = 1e-10);

/// Rows of the frame selected by the pattern, as a dense matrix of the same scalar type.
template <class Mat>
Mat pattern_rows(const Mat& a, const ErasurePattern& pattern) {
  return a(pattern.vector(), Eigen::all);
}

// Text serialization. Values are written with shortest round-trip formatting
// so a read-back frame compares equal to the original.
void write_frame(std::ostream& os, const Frame& frame);
Frame read_frame(std::istream& is);
void save_frame(const std::string& path, const Frame& frame);
Frame load_frame(const std::string& path);

bool is_prime(long long v);

}  // namespace ancod
