#include "ancod/coder.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "ancod/patterns.hpp"
#include "ancod/rd_model.hpp"
#include "ancod/rng.hpp"

namespace ancod {

Frame::Storage encoder_matrix(const Frame& frame, const ErasurePattern& pattern) {
  if (pattern.universe() != frame.rows()) throw DimensionError("pattern universe does not match frame rows");
  if (pattern.size() > frame.cols()) throw DimensionError("pattern size k exceeds frame dimension m");
  return frame.visit([&](const auto& a) -> Frame::Storage { return encoder_matrix_of_rows(pattern_rows(a, pattern)); });
}

std::uint64_t pattern_hash(const ErasurePattern& pattern) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int i : pattern.indices()) {
    h ^= static_cast<std::uint64_t>(i);
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

template <class Scalar>
Scalar draw(std::normal_distribution<double>& unit, Rng& rng, double variance) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return std::sqrt(variance) * unit(rng);
  } else {
    // Circular complex Gaussian with E|z|² = variance.
    const double s = std::sqrt(0.5 * variance);
    const double re = unit(rng);
    const double im = unit(rng);
    return Scalar(s * re, s * im);
  }
}

struct Accumulator {
  CompensatedSum mse;
  CompensatedSum mse_sq;
  CompensatedSum energy;
  CompensatedSum energy_sq;
  CompensatedSum model_energy;
  int count = 0;
};

// One pass of the chain for a fixed pattern. Returns (‖f‖²/m, mse, max |x̂ - x|).
template <class Mat>
void run_trial(const Mat& sub, const Mat& encoder, double sigma_x2, double sigma_q2, double alpha, bool noiseless,
               Rng& rng, double& f_energy, double& mse, double& max_err) {
  using Scalar = typename Mat::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto k = sub.rows();
  const auto m = sub.cols();
  std::normal_distribution<double> unit(0.0, 1.0);
  Vec xs(k);
  for (Eigen::Index i = 0; i < k; ++i) xs(i) = draw<Scalar>(unit, rng, sigma_x2);
  const Vec f = encoder * xs;
  Vec received = f;
  if (!noiseless) {
    for (Eigen::Index i = 0; i < m; ++i) received(i) += draw<Scalar>(unit, rng, sigma_q2);
  }
  const Vec xhat = (noiseless ? 1.0 : alpha) * (sub * received);
  f_energy = f.squaredNorm() / static_cast<double>(m);
  mse = (xhat - xs).squaredNorm() / static_cast<double>(k);
  max_err = (xhat - xs).cwiseAbs().maxCoeff();
}

CoderReport finish(Accumulator& acc, CoderReport r) {
  const double t = acc.count;
  if (acc.count > 0) {
    r.empirical_distortion = acc.mse.value() / t;
    r.empirical_f_energy = acc.energy.value() / t;
    r.model_f_energy = acc.model_energy.value() / t;
    if (acc.count > 1) {
      const double var_mse = std::max(0.0, (acc.mse_sq.value() - t * r.empirical_distortion * r.empirical_distortion) / (t - 1));
      const double var_e = std::max(0.0, (acc.energy_sq.value() - t * r.empirical_f_energy * r.empirical_f_energy) / (t - 1));
      r.distortion_stderr = std::sqrt(var_mse / t);
      r.f_energy_stderr = std::sqrt(var_e / t);
    }
  }
  const double ratio = static_cast<double>(r.m) / r.n;
  if (r.sigma_q2 > 0.0) {
    r.empirical_rate = ratio * 0.5 * std::log2(1.0 + r.empirical_f_energy / r.sigma_q2);
    r.model_rate = ratio * 0.5 * std::log2(1.0 + r.model_f_energy / r.sigma_q2);
  } else {
    r.empirical_rate = kInfinity;
    r.model_rate = kInfinity;
  }
  return r;
}

CoderReport base_report(const Frame& frame, int k, double sigma_x2, double sigma_q2, int trials, std::uint64_t seed,
                        const CoderOptions& options) {
  if (!(sigma_x2 > 0.0)) throw DomainError("source variance must be positive");
  if (!options.noiseless && !(sigma_q2 > 0.0)) throw DomainError("quantization noise variance must be positive");
  if (trials < 1) throw DomainError("simulate needs trials >= 1");
  if (k < 1 || k > frame.cols()) throw DimensionError("simulate needs 1 <= k <= m");
  CoderReport r;
  r.n = frame.rows();
  r.m = frame.cols();
  r.k = k;
  r.sigma_x2 = sigma_x2;
  r.sigma_q2 = options.noiseless ? 0.0 : sigma_q2;
  r.alpha = options.noiseless ? 1.0 : wiener_alpha(sigma_x2, sigma_q2);
  r.model_distortion = options.noiseless ? 0.0 : wiener_distortion(sigma_x2, sigma_q2);
  r.trials = trials;
  r.seed = seed;
  return r;
}

void record(Accumulator& acc, CoderReport& r, const CoderOptions& options, int trial, const ErasurePattern& pattern,
            double eta, double sigma_x2, double f_energy, double mse, double max_err) {
  acc.mse.add(mse);
  acc.mse_sq.add(mse * mse);
  acc.energy.add(f_energy);
  acc.energy_sq.add(f_energy * f_energy);
  acc.model_energy.add(eta * sigma_x2);
  ++acc.count;
  r.max_interpolation_error = std::max(r.max_interpolation_error, options.noiseless ? max_err : 0.0);
  if (options.record_trace) r.trace.push_back({trial, pattern_hash(pattern), f_energy, mse});
}

}  // namespace

CoderReport simulate(const Frame& frame, int k, double sigma_x2, double sigma_q2, int trials, std::uint64_t seed,
                     const CoderOptions& options) {
  CoderReport r = base_report(frame, k, sigma_x2, sigma_q2, trials, seed, options);
  Accumulator acc;
  const int n = frame.rows();
  const int m = frame.cols();
  frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    for (int t = 0; t < trials; ++t) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(t));
      const ErasurePattern pattern = sample_pattern(n, k, rng);
      const Mat sub = pattern_rows(a, pattern);
      Mat encoder;
      try {
        encoder = encoder_matrix_of_rows(sub);
      } catch (const SingularError&) {
        ++r.singular_trials;
        continue;
      }
      const double eta = encoder.squaredNorm() / m;
      double f_energy = 0.0;
      double mse = 0.0;
      double max_err = 0.0;
      run_trial(sub, encoder, sigma_x2, sigma_q2, r.alpha, options.noiseless, rng, f_energy, mse, max_err);
      record(acc, r, options, t, pattern, eta, sigma_x2, f_energy, mse, max_err);
    }
  });
  return finish(acc, std::move(r));
}

CoderReport simulate_pattern(const Frame& frame, const ErasurePattern& pattern, double sigma_x2, double sigma_q2,
                             int trials, std::uint64_t seed, const CoderOptions& options) {
  if (pattern.universe() != frame.rows()) throw DimensionError("pattern universe does not match frame rows");
  CoderReport r = base_report(frame, pattern.size(), sigma_x2, sigma_q2, trials, seed, options);
  Accumulator acc;
  const int m = frame.cols();
  frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    const Mat sub = pattern_rows(a, pattern);
    const Mat encoder = encoder_matrix_of_rows(sub);
    const double eta = encoder.squaredNorm() / m;
    for (int t = 0; t < trials; ++t) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(t));
      double f_energy = 0.0;
      double mse = 0.0;
      double max_err = 0.0;
      run_trial(sub, encoder, sigma_x2, sigma_q2, r.alpha, options.noiseless, rng, f_energy, mse, max_err);
      record(acc, r, options, t, pattern, eta, sigma_x2, f_energy, mse, max_err);
    }
  });
  return finish(acc, std::move(r));
}

nlohmann::json coder_report_json(const CoderReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "nan";
  };
  return {
      {"n", r.n},
      {"m", r.m},
      {"k", r.k},
      {"sigma_x2", r.sigma_x2},
      {"sigma_q2", r.sigma_q2},
      {"alpha", r.alpha},
      {"empirical_distortion", r.empirical_distortion},
      {"distortion_stderr", r.distortion_stderr},
      {"model_distortion", r.model_distortion},
      {"empirical_f_energy", r.empirical_f_energy},
      {"f_energy_stderr", r.f_energy_stderr},
      {"model_f_energy", r.model_f_energy},
      {"empirical_rate", num(r.empirical_rate)},
      {"model_rate", num(r.model_rate)},
      {"max_interpolation_error", r.max_interpolation_error},
      {"trials", r.trials},
      {"singular_trials", r.singular_trials},
      {"seed", r.seed},
  };
}

void write_coder_trace_csv(std::ostream& os, const CoderReport& r) {
  os << "trial,pattern_hash,f_energy,mse\n";
  for (const auto& row : r.trace) {
    os << row.trial << ',' << row.pattern_hash << ',' << row.f_energy << ',' << row.mse << '\n';
  }
}

}  // namespace ancod
