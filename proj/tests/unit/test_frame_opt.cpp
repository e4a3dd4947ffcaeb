#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ancod/error.hpp"
#include "ancod/frame.hpp"
#include "ancod/frame_opt.hpp"
#include "ancod/patterns.hpp"
#include "oracles.hpp"

using namespace ancod;

namespace {

template <class Mat>
double fd_directional(const Frame& frame, const Mat& direction, std::span<const ErasurePattern> patterns, double h) {
  const Mat& a = std::get<Mat>(frame.data());
  return oracle::central_difference(
      [&](double t) { return mlie_objective(Frame(Mat(a + t * direction), FrameKind::custom), patterns); }, h);
}

}  // namespace

TEST_CASE("MLIE gradient against central differences") {
  SUBCASE("8x4 real frame with 5 patterns, each entry") {
    const Frame f = build_random_iid(8, 4, Field::real, 1);
    const auto ps = sample_patterns(8, 3, 5, 2);
    const RealMatrix g = std::get<RealMatrix>(mlie_gradient(f, ps));
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 4; ++j) {
        RealMatrix e = RealMatrix::Zero(8, 4);
        e(i, j) = 1.0;
        const double fd = fd_directional(f, e, ps, 1e-6);
        CHECK(std::abs(fd - g(i, j)) <= 1e-5 * std::max(1.0, std::abs(g(i, j))) + 1e-9);
      }
    }
  }
  SUBCASE("20 random instances, random directions") {
    for (int inst = 0; inst < 20; ++inst) {
      const bool complex = inst % 2 == 1;
      const int n = 6 + inst % 5;
      const int m = 3 + inst % 3;
      const int k = 1 + inst % m;
      const auto seed = static_cast<std::uint64_t>(inst);
      const Frame f = build_random_iid(n, m, complex ? Field::complex : Field::real, seed).normalized();
      const auto ps = sample_patterns(n, k, 6, seed + 100);
      const Frame::Storage g = mlie_gradient(f, ps);
      Rng rng = substream(seed, 7);
      std::normal_distribution<double> z(0.0, 1.0);
      double analytic = 0.0;
      double fd = 0.0;
      if (complex) {
        ComplexMatrix d(n, m);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) d(i, j) = Complex(z(rng), z(rng));
        const ComplexMatrix& gc = std::get<ComplexMatrix>(g);
        // Directional derivative is Σ Re(g) Re(d) + Im(g) Im(d).
        analytic = (gc.real().array() * d.real().array() + gc.imag().array() * d.imag().array()).sum();
        fd = fd_directional(f, d, ps, 1e-6);
      } else {
        RealMatrix d(n, m);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) d(i, j) = z(rng);
        analytic = (std::get<RealMatrix>(g).array() * d.array()).sum();
        fd = fd_directional(f, d, ps, 1e-6);
      }
      CHECK(std::abs(fd - analytic) <= 1e-5 * std::max(1.0, std::abs(analytic)));
    }
  }
  SUBCASE("rows outside every pattern get zero gradient") {
    const Frame f = build_dss(11);
    const std::vector<ErasurePattern> ps{ErasurePattern({0, 2, 3}, 11), ErasurePattern({2, 3, 5}, 11)};
    const ComplexMatrix g = std::get<ComplexMatrix>(mlie_gradient(f, ps));
    for (int i : {1, 4, 6, 7, 8, 9, 10}) CHECK(g.row(i).norm() == 0.0);
    CHECK(g.row(0).norm() > 0.0);
  }
  SUBCASE("projected gradient vanishes at a unitary frame") {
    Eigen::HouseholderQR<RealMatrix> qr(std::get<RealMatrix>(build_random_iid(5, 5, Field::real, 3).data()));
    const Frame u(RealMatrix(qr.householderQ()), FrameKind::custom);
    const auto ps = enumerate_patterns(5, 5);
    CHECK(projected_gradient_norm(u, mlie_gradient(u, ps)) < 1e-9);
  }
  SUBCASE("singular patterns throw") {
    const Frame f = build_dft_spectrum(8, {0, 2, 4, 6});
    const std::vector<ErasurePattern> ps{ErasurePattern({0, 2, 4, 6}, 8)};
    CHECK_THROWS_AS(mlie_gradient(f, ps), SingularError);
    CHECK(std::isinf(mlie_objective(f, ps)));
  }
}

TEST_CASE("manifold helpers") {
  const Frame f = build_paley_etf(6);
  SUBCASE("normalization is idempotent on unit rows") {
    const Frame g = f.normalized();
    CHECK((std::get<RealMatrix>(g.data()) - std::get<RealMatrix>(f.data())).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("tangent projection is idempotent and orthogonal to rows") {
    const RealMatrix& a = std::get<RealMatrix>(f.data());
    const RealMatrix g = std::get<RealMatrix>(build_random_iid(6, 3, Field::real, 4).data());
    const RealMatrix t1 = tangent_projection(a, g);
    const RealMatrix t2 = tangent_projection(a, t1);
    CHECK((t1 - t2).cwiseAbs().maxCoeff() < 1e-15);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(a.row(i).dot(t1.row(i))) < 1e-15);
  }
  SUBCASE("perturbation stays on the manifold at the requested distance") {
    Rng rng = substream(5, 0);
    const Frame p = perturb_on_manifold(f, 1e-2, rng);
    CHECK(p.max_row_norm_deviation() < 1e-14);
    const RealMatrix diff = std::get<RealMatrix>(p.data()) - std::get<RealMatrix>(f.data());
    for (int i = 0; i < 6; ++i) CHECK(diff.row(i).norm() == doctest::Approx(1e-2).epsilon(1e-4));
  }
}

TEST_CASE("local search") {
  SUBCASE("band-limited start improves and descends monotonically") {
    const Frame init = build_bandlimited_dft(13, 7);
    LocalSearchOptions opt;
    opt.max_iterations = 60;
    const auto [report, frame] = local_search(init, 5, opt, 1);
    CHECK(report.exhaustive);
    CHECK(report.pattern_count == 1287);
    CHECK(report.final_mlie < report.initial_mlie - 1e-3);
    CHECK(report.final_mlie <= report.initial_mlie + 1e-12);
    for (std::size_t i = 1; i < report.step_history.size(); ++i)
      CHECK(report.step_history[i].mlie <= report.step_history[i - 1].mlie);
    CHECK(frame.max_row_norm_deviation() < 1e-12);
    const auto ps = enumerate_patterns(13, 5);
    CHECK(mlie_objective(frame, ps) == doctest::Approx(report.final_mlie).epsilon(1e-12));
  }
  SUBCASE("DSS (7,3), k = 2 is already a minimizer") {
    const auto [report, frame] = local_search(build_dss(7), 2, {}, 2);
    CHECK(report.pattern_count == 21);
    CHECK(report.initial_mlie - report.final_mlie < 1e-6);
  }
  SUBCASE("zero iterations return the input unchanged") {
    LocalSearchOptions opt;
    opt.max_iterations = 0;
    const Frame init = build_random_iid(9, 4, Field::real, 8).normalized();
    const auto [report, frame] = local_search(init, 3, opt, 3);
    CHECK(frame == init);
    CHECK(report.iterations == 0);
  }
  SUBCASE("sampled objective reports a fresh sample") {
    LocalSearchOptions opt;
    opt.pattern_budget = 200;
    opt.max_iterations = 5;
    const auto [report, frame] = local_search(build_random_spectrum(31, 15, 2), 10, opt, 4);
    CHECK_FALSE(report.exhaustive);
    CHECK(std::isfinite(report.fresh_initial_mlie));
    CHECK(std::isfinite(report.fresh_final_mlie));
  }
  SUBCASE("deterministic under seed") {
    LocalSearchOptions opt;
    opt.pattern_budget = 100;
    opt.max_iterations = 5;
    const Frame init = build_random_spectrum(23, 11, 1);
    const auto a = local_search(init, 6, opt, 9);
    const auto b = local_search(init, 6, opt, 9);
    CHECK(a.frame == b.frame);
    CHECK(a.report.final_mlie == b.report.final_mlie);
  }
  CHECK_THROWS_AS(local_search(build_dss(7), 4, {}, 0), DimensionError);
}

TEST_CASE("local minimum verification") {
  const std::vector<double> eps{1e-3, 1e-2};
  SUBCASE("DSS (7,3), k = 2") {
    const OptReport r = verify_local_min(build_dss(7), 2, eps, 200, 1);
    REQUIRE(r.perturbation_verdicts.size() == 2u);
    CHECK(r.perturbation_verdicts[0].max_decrease <= 1e-9);
    CHECK(r.perturbation_verdicts[1].max_decrease <= 1e-9);
    CHECK(r.pattern_count == 21);
  }
  SUBCASE("Paley (6,3), k = 2") {
    const OptReport r = verify_local_min(build_paley_etf(6), 2, eps, 200, 1);
    CHECK(r.perturbation_verdicts[0].max_decrease <= 1e-9);
    CHECK(r.perturbation_verdicts[1].fraction_decreased == 0.0);
  }
  SUBCASE("random i.i.d. (12,6), k = 4 is not a local minimum") {
    const OptReport r = verify_local_min(build_random_iid(12, 6, Field::real, 0), 4, eps, 200, 1);
    CHECK(r.perturbation_verdicts[0].fraction_decreased > 0.0);
    CHECK(r.perturbation_verdicts[0].max_decrease > 1e-9);
  }
  SUBCASE("guard and Monte Carlo mode") {
    VerifyOptions opt;
    opt.guard = 10;
    CHECK_THROWS_AS(verify_local_min(build_dss(7), 2, eps, 5, 1, opt), GuardError);
    opt.mode = StatMode::monte_carlo;
    opt.mc_patterns = 50;
    const OptReport r = verify_local_min(build_dss(7), 2, eps, 5, 1, opt);
    CHECK_FALSE(r.exhaustive);
    CHECK(r.pattern_count == 50);
  }
  std::ostringstream os;
  const auto res = local_search(build_bandlimited_dft(9, 4), 3, {}, 0);
  write_trajectory_csv(os, res.report);
  CHECK(os.str().rfind("iteration,sampled_mlie,step\n", 0) == 0);
}
