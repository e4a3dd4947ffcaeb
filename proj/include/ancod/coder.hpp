#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"

#include "ancod/error.hpp"
#include "ancod/frame.hpp"
#include "ancod/pattern.hpp"
#include "ancod/spectral.hpp"

namespace ancod {

/// Pseudo-inverse B_s = A_s'(A_sA_s')^{-1} of a k x m block. Throws
/// SingularError when the block is rank deficient.
template <class Mat>
Mat encoder_matrix_of_rows(const Mat& sub) {
  using Scalar = typename Mat::Scalar;
  using Square = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Square gram = sub * sub.adjoint();
  Eigen::LLT<Square> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularError("pattern submatrix is rank deficient");
  // B' = G^{-1} A_s, since G is Hermitian.
  const Square bt = llt.solve(sub);
  // ‖B‖_F² = tr(G^{-1}); same singularity proxy as inverse_energy_of_rows.
  const double trace_inv = bt.squaredNorm();
  if (!std::isfinite(trace_inv) || trace_inv * std::real(gram.trace()) >= 1.0 / kSingularRatio) {
    throw SingularError("pattern submatrix is numerically rank deficient");
  }
  return bt.adjoint();
}

/// m x k encoder for the pattern, in the frame's scalar type.
Frame::Storage encoder_matrix(const Frame& frame, const ErasurePattern& pattern);

struct CoderOptions {
  /// Drop the quantization noise and use α = 1; the chain must then
  /// reproduce x_s exactly.
  bool noiseless = false;
  bool record_trace = false;
};

struct CoderTraceRow {
  int trial = 0;
  std::uint64_t pattern_hash = 0;
  double f_energy = 0.0;  ///< ‖f‖²/m
  double mse = 0.0;       ///< ‖x̂_s - x_s‖²/k
};

struct CoderReport {
  int n = 0;
  int m = 0;
  int k = 0;
  double sigma_x2 = 0.0;
  double sigma_q2 = 0.0;
  double alpha = 0.0;
  double empirical_distortion = 0.0;
  double distortion_stderr = 0.0;
  double model_distortion = 0.0;
  double empirical_f_energy = 0.0;
  double f_energy_stderr = 0.0;
  double model_f_energy = 0.0;  ///< mean of η_s σx² over the simulated patterns
  double empirical_rate = 0.0;  ///< (m/n)(1/2)log2(1 + empirical_f_energy/σq²)
  double model_rate = 0.0;      ///< (m/n)(1/2)log2(1 + model_f_energy/σq²)
  double max_interpolation_error = 0.0;  ///< noiseless mode only
  int trials = 0;
  int singular_trials = 0;
  std::uint64_t seed = 0;
  std::vector<CoderTraceRow> trace;
};

/// Monte Carlo run of the encode / add-noise / Wiener-decode chain with a
/// fresh uniform k-pattern per trial. Singular patterns are counted and skipped.
CoderReport simulate(const Frame& frame, int k, double sigma_x2, double sigma_q2, int trials, std::uint64_t seed,
                     const CoderOptions& options = {});

/// Same chain with the pattern held fixed; model_f_energy is then η_s σx².
CoderReport simulate_pattern(const Frame& frame, const ErasurePattern& pattern, double sigma_x2, double sigma_q2,
                             int trials, std::uint64_t seed, const CoderOptions& options = {});

std::uint64_t pattern_hash(const ErasurePattern& pattern);

nlohmann::json coder_report_json(const CoderReport& report);
void write_coder_trace_csv(std::ostream& os, const CoderReport& report);

}  // namespace ancod
