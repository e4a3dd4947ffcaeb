#include "ancod/frame_opt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "ancod/error.hpp"
#include "ancod/spectral.hpp"

namespace ancod {

double mlie_objective(const Frame& frame, std::span<const ErasurePattern> patterns) {
  if (patterns.empty()) throw DomainError("MLIE needs at least one pattern");
  const int n = frame.rows();
  const int m = frame.cols();
  CompensatedSum sum;
  for (const auto& p : patterns) {
    const double eta = inverse_energy(frame, p);
    if (!std::isfinite(eta)) return kInfinity;
    sum.add(mlie_term(eta, n, m));
  }
  return sum.value() / static_cast<double>(patterns.size());
}

Frame::Storage mlie_gradient(const Frame& frame, std::span<const ErasurePattern> patterns) {
  if (patterns.empty()) throw DomainError("MLIE gradient needs at least one pattern");
  const int n = frame.rows();
  const int m = frame.cols();
  return frame.visit([&](const auto& a) -> Frame::Storage {
    using Mat = std::decay_t<decltype(a)>;
    Mat grad = Mat::Zero(a.rows(), a.cols());
    for (const auto& p : patterns) {
      if (p.universe() != n || p.size() > m) throw DimensionError("pattern does not fit the frame");
      const Mat sub = pattern_rows(a, p);
      const Mat gram = sub * sub.adjoint();
      Eigen::LLT<Mat> llt(gram);
      if (llt.info() != Eigen::Success) throw SingularError("singular pattern in MLIE gradient");
      const Mat ginv = llt.solve(Mat::Identity(gram.rows(), gram.cols()));
      const double trace_inv = std::real(ginv.trace());
      if (!std::isfinite(trace_inv) || trace_inv * std::real(gram.trace()) >= 1.0 / kSingularRatio) {
        throw SingularError("singular pattern in MLIE gradient");
      }
      const double eta = trace_inv / m;
      // d tr(G^{-1}) / dA_s = -2 G^{-2} A_s; chain through (m/n)(1/2)log2(η).
      const Mat block = -(ginv * ginv * sub) / (static_cast<double>(n) * std::numbers::ln2 * eta);
      for (int r = 0; r < p.size(); ++r) grad.row(p[r]) += block.row(r);
    }
    grad /= static_cast<double>(patterns.size());
    return grad;
  });
}

double projected_gradient_norm(const Frame& frame, const Frame::Storage& gradient) {
  return frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    return tangent_projection(a, std::get<Mat>(gradient)).norm();
  });
}

Frame perturb_on_manifold(const Frame& frame, double epsilon, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  return frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    using Scalar = typename Mat::Scalar;
    Mat z(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if constexpr (std::is_same_v<Scalar, double>) {
          z(i, j) = unit(rng);
        } else {
          const double re = unit(rng);
          const double im = unit(rng);
          z(i, j) = Scalar(re, im);
        }
      }
    }
    z = tangent_projection(a, z);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double nz = z.row(i).norm();
      if (nz > 0.0) z.row(i) *= epsilon / nz;
    }
    Mat out = a + z;
    out.rowwise().normalize();
    return Frame(std::move(out), FrameKind::custom);
  });
}

double PerturbationVerdict::fraction_decreased_by(double threshold) const {
  if (deltas.empty()) return 0.0;
  std::size_t c = 0;
  for (double d : deltas)
    if (-d > threshold) ++c;
  return static_cast<double>(c) / static_cast<double>(deltas.size());
}

namespace {

std::vector<ErasurePattern> objective_patterns(int n, int k, double budget, std::uint64_t seed, bool& exhaustive) {
  exhaustive = binomial(n, k) <= budget;
  if (exhaustive) return enumerate_patterns(n, k, budget);
  return sample_patterns(n, k, static_cast<int>(budget), seed);
}

Frame descend(const Frame& frame, const Frame::Storage& gradient, double step) {
  return frame.visit([&](const auto& a) {
    using Mat = std::decay_t<decltype(a)>;
    Mat out = a - step * tangent_projection(a, std::get<Mat>(gradient));
    out.rowwise().normalize();
    return Frame(std::move(out), FrameKind::custom);
  });
}

}  // namespace

LocalSearchResult local_search(const Frame& init, int k, const LocalSearchOptions& options, std::uint64_t seed) {
  const int n = init.rows();
  if (k < 1 || k > init.cols()) throw DimensionError("local_search needs 1 <= k <= m");
  bool exhaustive = false;
  const auto patterns = objective_patterns(n, k, options.pattern_budget, seed, exhaustive);

  OptReport report;
  report.exhaustive = exhaustive;
  report.pattern_count = static_cast<int>(patterns.size());

  Frame current = init.max_row_norm_deviation() < 1e-12 ? init : init.normalized();
  double value = mlie_objective(current, patterns);
  if (!std::isfinite(value)) throw SingularError("local_search start is not full spark on the pattern sample");
  report.initial_mlie = value;
  report.step_history.push_back({0, value, 0.0});

  std::vector<ErasurePattern> fresh;
  if (!exhaustive) {
    fresh = sample_patterns(n, k, static_cast<int>(options.pattern_budget), seed ^ 0x9e3779b97f4a7c15ULL);
    report.fresh_initial_mlie = mlie_objective(current, fresh);
  } else {
    report.fresh_initial_mlie = std::numeric_limits<double>::quiet_NaN();
  }

  double step = options.initial_step;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Frame::Storage grad = mlie_gradient(current, patterns);
    const double gnorm = projected_gradient_norm(current, grad);
    if (gnorm <= options.gradient_tol) {
      report.converged = true;
      break;
    }
    bool accepted = false;
    double trial_step = step;
    for (int bt = 0; bt <= options.max_backtracks; ++bt) {
      Frame candidate = descend(current, grad, trial_step);
      const double cand_value = mlie_objective(candidate, patterns);
      if (std::isfinite(cand_value) && cand_value <= value - options.armijo * trial_step * gnorm * gnorm) {
        const double improvement = value - cand_value;
        current = std::move(candidate);
        value = cand_value;
        accepted = true;
        report.iterations = it;
        report.step_history.push_back({it, value, trial_step});
        if (improvement <= options.mlie_tol) report.converged = true;
        break;
      }
      trial_step *= options.shrink;
    }
    if (!accepted) {
      // No admissible step at machine precision: stationary for practical purposes.
      report.converged = gnorm * gnorm * trial_step < 1e-15;
      break;
    }
    if (report.converged) break;
    step = std::min(trial_step * 2.0, 1.0);
  }

  report.final_mlie = value;
  report.fresh_final_mlie = exhaustive ? std::numeric_limits<double>::quiet_NaN() : mlie_objective(current, fresh);
  if (report.iterations == 0) current = init;
  return {std::move(report), std::move(current)};
}

OptReport verify_local_min(const Frame& frame, int k, std::span<const double> epsilons, int trials,
                           std::uint64_t seed, const VerifyOptions& options) {
  const int n = frame.rows();
  if (k < 1 || k > frame.cols()) throw DimensionError("verify_local_min needs 1 <= k <= m");
  if (trials < 1) throw DomainError("verify_local_min needs trials >= 1");
  std::vector<ErasurePattern> patterns;
  OptReport report;
  if (options.mode == StatMode::exhaustive) {
    patterns = enumerate_patterns(n, k, options.guard);
    report.exhaustive = true;
  } else {
    patterns = sample_patterns(n, k, options.mc_patterns, seed);
  }
  report.pattern_count = static_cast<int>(patterns.size());

  const Frame base = frame.max_row_norm_deviation() < 1e-12 ? frame : frame.normalized();
  const double base_value = mlie_objective(base, patterns);
  if (!std::isfinite(base_value)) throw SingularError("frame is not full spark on the verification patterns");
  report.initial_mlie = base_value;
  report.final_mlie = base_value;

  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    PerturbationVerdict v;
    v.epsilon = epsilons[e];
    v.trials = trials;
    v.max_decrease = -kInfinity;
    int decreased = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng = substream(seed, static_cast<std::uint64_t>(t), 1000 + e);
      const Frame perturbed = perturb_on_manifold(base, epsilons[e], rng);
      const double value = mlie_objective(perturbed, patterns);
      const double delta = value - base_value;
      v.deltas.push_back(delta);
      v.max_decrease = std::max(v.max_decrease, -delta);
      if (-delta > options.noise_floor) ++decreased;
      report.final_mlie = std::min(report.final_mlie, value);
    }
    v.fraction_decreased = static_cast<double>(decreased) / trials;
    report.perturbation_verdicts.push_back(std::move(v));
  }
  report.converged = true;
  return report;
}

void write_trajectory_csv(std::ostream& os, const OptReport& report) {
  os << "iteration,sampled_mlie,step\n";
  for (const auto& s : report.step_history) os << s.iteration << ',' << s.mlie << ',' << s.step << '\n';
}

}  // namespace ancod
