#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ancod/error.hpp"
#include "ancod/rd_model.hpp"

using namespace ancod;

namespace {
constexpr double kInfinityRate = std::numeric_limits<double>::infinity();
}

TEST_CASE("frozen rate values") {
  CHECK(rdf(0.2, 1000.0) == doctest::Approx(0.99658).epsilon(1e-5));
  CHECK(scheme_rate(4, 2, 0.5, 101.0) == doctest::Approx(1.4181063354928738).epsilon(1e-14));
  CHECK(excess_rate(0.2, 2.0, 100.0, 1.0).exact == doctest::Approx(0.66439).epsilon(1e-5));
  CHECK(si_benchmark(0.2) == doctest::Approx(0.7219280948873623).epsilon(1e-14));
  CHECK(si_benchmark_finite(10, 2) == doctest::Approx(0.5491853096329675).epsilon(1e-13));
  CHECK(high_sdr_asymptote(0.2, 1e6) == doctest::Approx(0.3788216973420878).epsilon(1e-14));
}

TEST_CASE("excess rate equals scheme rate minus RDF") {
  for (int n : {20, 100, 947}) {
    for (double ratio : {0.3, 0.5, 0.8}) {
      const int m = static_cast<int>(std::round(ratio * n));
      for (int k : {1, m / 2, m}) {
        if (k < 1) continue;
        for (double eta : {static_cast<double>(k) / m, 1.0, 3.7, 120.0}) {
          for (double gamma : {1.5, 10.0, 1e4}) {
            const double p = static_cast<double>(k) / n;
            const double beta = static_cast<double>(m) / k;
            const double lhs = excess_rate(p, beta, gamma, eta).exact;
            const double rhs = scheme_rate(n, m, eta, gamma) - rdf(p, gamma);
            CHECK(std::abs(lhs - rhs) < 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("excess rate is monotone in eta and its high-resolution form converges") {
  double prev = -kInfinityRate;
  for (double eta = 0.1; eta < 100.0; eta *= 1.3) {
    const double d = excess_rate(0.25, 2.0, 1e3, eta).exact;
    CHECK(d > prev);
    prev = d;
  }
  const ExcessRate lo = excess_rate(0.2, 2.0, 10.0, 2.0);
  CHECK_FALSE(lo.high_res_valid);
  const ExcessRate hi = excess_rate(0.2, 2.0, 1e8, 2.0);
  CHECK(hi.high_res_valid);
  CHECK(std::abs(hi.exact - hi.high_res) < 1e-7);
  const double hi_form = 2.0 * 0.1 * std::log2(2.0) + 1.0 * 0.1 * std::log2(1e8);
  CHECK(hi.high_res == doctest::Approx(hi_form).epsilon(1e-14));
}

TEST_CASE("finite-n SI benchmark approaches the binary entropy") {
  double prev_gap = kInfinityRate;
  for (int n : {10, 100, 1000, 10000, 100000}) {
    const double gap = std::abs(si_benchmark_finite(n, n / 5) - si_benchmark(0.2));
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);
  CHECK(si_benchmark(0.5) == doctest::Approx(1.0));
  CHECK(si_benchmark(0.0) == 0.0);
  CHECK(si_benchmark(1.0) == 0.0);
  CHECK_THROWS_AS(si_benchmark(1.5), DomainError);
}

TEST_CASE("Wiener bookkeeping") {
  CHECK(wiener_distortion(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(wiener_alpha(3.0, 1.0) == doctest::Approx(0.75));
  const double q = noise_for_sdr(2.0, 101.0);
  CHECK(q == doctest::Approx(0.02));
  CHECK(sdr_from_noise(2.0, q) == doctest::Approx(101.0).epsilon(1e-12));
  CHECK(db_to_gamma(30.0) == doctest::Approx(1000.0));
  CHECK(gamma_to_db(1e6) == doctest::Approx(60.0));
  CHECK_THROWS_AS(noise_for_sdr(1.0, 1.0), DomainError);
  CHECK(std::isinf(scheme_rate(10, 5, kInfinityRate, 10.0)));
}

TEST_CASE("random transform excess and beta optimization") {
  // β = 1/p means m = n; β → 1 makes η diverge.
  CHECK(random_transform_excess(0.2, 2.0, 1000.0) ==
        doctest::Approx(excess_rate(0.2, 2.0, 1000.0, 1.0).exact).epsilon(1e-14));
  const BetaOptimum opt = optimize_beta(0.2, 1e4);
  CHECK(opt.beta > 1.0);
  CHECK(opt.beta <= 5.0);
  for (double b = 1.01; b <= 5.0; b += 0.01) CHECK(random_transform_excess(0.2, b, 1e4) >= opt.delta - 1e-12);
  CHECK_THROWS_AS(optimize_beta(0.2, 0.5), DomainError);
  CHECK_THROWS_AS(optimize_beta(1.5, 10.0), DomainError);
  CHECK_THROWS_AS(high_sdr_asymptote(0.2, 2.0), DomainError);
}

TEST_CASE("optimized excess tracks the high-SDR asymptote") {
  double prev_ratio = kInfinityRate;
  for (double db : {30.0, 40.0, 50.0, 60.0, 80.0, 100.0}) {
    const double g = db_to_gamma(db);
    const double ratio = optimize_beta(0.2, g).delta / high_sdr_asymptote(0.2, g);
    CHECK(ratio > 1.0);
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("RD points and CSV") {
  const RDPoint pt = make_rd_point(100, 50, 20, 1.2, 1000.0);
  CHECK(pt.p == doctest::Approx(0.2));
  CHECK(pt.beta == doctest::Approx(2.5));
  CHECK(pt.gamma_db == doctest::Approx(30.0));
  CHECK(pt.delta_bits == doctest::Approx(pt.rate_bits - pt.rdf_bits).epsilon(1e-12));
  std::ostringstream os;
  write_rd_points_csv(os, {pt});
  CHECK(os.str().rfind("p,beta,gamma_db,eta,rate_bits,rdf_bits,delta_bits,si_bits\n", 0) == 0);
}
