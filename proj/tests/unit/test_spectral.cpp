#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ancod/error.hpp"
#include "ancod/frame.hpp"
#include "ancod/patterns.hpp"
#include "ancod/spectral.hpp"
#include "oracles.hpp"

using namespace ancod;

TEST_CASE("inverse energy on the (7,3) DSS frame") {
  const Frame f = build_dss(7);
  SUBCASE("k = m = 3") {
    const EigenSample s = gram_eigenvalues(f, ErasurePattern({0, 1, 3}, 7));
    REQUIRE(s.eigenvalues.size() == 3u);
    CHECK(s.eigenvalues[0] == doctest::Approx(0.40290405).epsilon(1e-7));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.66666667).epsilon(1e-7));
    CHECK(s.eigenvalues[2] == doctest::Approx(1.93042928).epsilon(1e-7));
    CHECK(s.eta == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(inverse_energy(f, ErasurePattern({0, 1, 3}, 7)) == doctest::Approx(1.5).epsilon(1e-12));
  }
  SUBCASE("k = 2 with |<a_i,a_j>| at the Welch bound") {
    CHECK(inverse_energy(f, ErasurePattern({1, 5}, 7)) == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("inverse energy agrees with explicit inversion") {
  const Frame f = build_random_iid(40, 12, Field::real, 3);
  const auto& a = std::get<RealMatrix>(f.data());
  for (int i = 0; i < 20; ++i) {
    const ErasurePattern p = sample_pattern(40, 1 + i % 12, static_cast<std::uint64_t>(i));
    const RealMatrix sub = pattern_rows(a, p);
    const double expected = oracle::inverse_energy_explicit(sub, 12);
    CHECK(inverse_energy(f, p) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(gram_eigenvalues(f, p).eta == doctest::Approx(expected).epsilon(1e-9));
  }
  const Frame c = build_random_spectrum(31, 10, 4);
  const auto& ac = std::get<ComplexMatrix>(c.data());
  for (int i = 0; i < 10; ++i) {
    const ErasurePattern p = sample_pattern(31, 6, static_cast<std::uint64_t>(i));
    const ComplexMatrix sub = pattern_rows(ac, p);
    CHECK(inverse_energy(c, p) == doctest::Approx(oracle::inverse_energy_explicit(sub, 10)).epsilon(1e-9));
  }
}

TEST_CASE("inverse energy properties") {
  SUBCASE("lower bound k/m for unit-norm frames") {
    for (const Frame& f : {build_dss(31), build_bandlimited_dft(31, 15), build_paley_etf(30),
                           build_random_iid(31, 15, Field::complex, 1).normalized()}) {
      for (int k = 1; k <= 15; k += 2) {
        for (int t = 0; t < 10; ++t) {
          const ErasurePattern p = sample_pattern(f.rows(), k, static_cast<std::uint64_t>(100 * k + t));
          CHECK(inverse_energy(f, p) >= static_cast<double>(k) / f.cols() * (1.0 - 1e-12));
        }
      }
    }
  }
  SUBCASE("trace identity: η equals the mean reciprocal eigenvalue times k/m") {
    const Frame f = build_random_spectrum(41, 20, 8);
    for (int t = 0; t < 15; ++t) {
      const EigenSample s = gram_eigenvalues(f, sample_pattern(41, 9, static_cast<std::uint64_t>(t)));
      double sum = 0.0;
      for (double l : s.eigenvalues) sum += 1.0 / l;
      CHECK(inverse_energy(f, s.pattern) == doctest::Approx(sum / 20.0).epsilon(1e-10));
    }
  }
  SUBCASE("invariance under joint row permutation") {
    const Frame f = build_random_iid(12, 5, Field::real, 6);
    const auto& a = std::get<RealMatrix>(f.data());
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
    perm.setIdentity();
    Rng rng = substream(6, 0);
    std::shuffle(perm.indices().data(), perm.indices().data() + 12, rng);
    const Frame g(RealMatrix(perm * a), FrameKind::custom);
    for (int t = 0; t < 10; ++t) {
      const ErasurePattern p = sample_pattern(12, 4, static_cast<std::uint64_t>(t));
      std::vector<int> mapped;
      for (int i : p.indices()) mapped.push_back(perm.indices()(i));
      std::sort(mapped.begin(), mapped.end());
      CHECK(inverse_energy(f, p) == doctest::Approx(inverse_energy(g, ErasurePattern(mapped, 12))).epsilon(1e-10));
    }
  }
  SUBCASE("singular patterns map to +inf") {
    const Frame f = build_dft_spectrum(8, {0, 2, 4, 6});
    CHECK(std::isinf(inverse_energy(f, ErasurePattern({0, 2, 4, 6}, 8))));
    CHECK(std::isinf(gram_eigenvalues(f, ErasurePattern({0, 2, 4, 6}, 8)).eta));
    RealMatrix dup(3, 2);
    dup << 1, 0, 1, 0, 0, 1;
    CHECK(std::isinf(inverse_energy(Frame(dup, FrameKind::custom), ErasurePattern({0, 1}, 3))));
  }
  SUBCASE("pattern validation") {
    const Frame f = build_dss(7);
    CHECK_THROWS_AS(inverse_energy(f, ErasurePattern({0, 1, 2, 3}, 7)), DimensionError);
    CHECK_THROWS_AS(inverse_energy(f, ErasurePattern({0, 1}, 8)), DimensionError);
  }
}

TEST_CASE("Marchenko-Pastur law") {
  const Support s = mp_support(4.0);
  CHECK(s.lo == doctest::Approx(0.25));
  CHECK(s.hi == doctest::Approx(2.25));
  CHECK(mp_eta_limit(1.25) == doctest::Approx(4.0));
  CHECK(std::isinf(mp_eta_limit(1.0)));
  for (double beta : {1.25, 2.0, 5.0}) {
    const Support sp = mp_support(beta);
    const double total = oracle::midpoint_semicircle([&](double x) { return mp_density(x, beta); }, sp.lo, sp.hi, 4000);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(DensityCurve::marchenko_pastur(beta).total_mass() == doctest::Approx(1.0).epsilon(1e-9));
    // E[1/λ] = β/(β-1) under the law, so η = (k/m)E[1/λ] = 1/(β-1).
    const double inv_mean =
        oracle::midpoint_semicircle([&](double x) { return mp_density(x, beta) / x; }, sp.lo, sp.hi, 4000);
    CHECK(inv_mean / beta == doctest::Approx(mp_eta_limit(beta)).epsilon(1e-6));
  }
  CHECK(mp_density(0.1, 4.0) == 0.0);
  CHECK(mp_density(3.0, 4.0) == 0.0);
}

TEST_CASE("MANOVA law") {
  SUBCASE("support at m/n = 1/2, beta = 1.25") {
    const Support s = manova_support(0.5, 1.25);
    CHECK(s.lo == doctest::Approx(0.020204102886728765).epsilon(1e-12));
    CHECK(s.hi == doctest::Approx(1.9797958971132716).epsilon(1e-12));
  }
  SUBCASE("eta limits") {
    CHECK(manova_eta_limit(1.25) == doctest::Approx(2.4).epsilon(1e-8));
    CHECK(manova_eta_limit_centered(1.25) == doctest::Approx(2.4).epsilon(1e-8));
    CHECK(manova_eta_limit(2.0, 0.3) == doctest::Approx(0.85).epsilon(1e-8));
    CHECK(manova_eta_limit(3.0) == doctest::Approx(5.0 / 12.0).epsilon(1e-8));
    CHECK(manova_eta_limit(473.0 / 378.0, 473.0 / 947.0) == doctest::Approx(2.390729728226857).epsilon(1e-8));
    CHECK(std::isinf(manova_eta_limit(1.0)));
    CHECK(manova_eta_limit(1.25, 0.7) == doctest::Approx(1.76).epsilon(1e-8));
  }
  SUBCASE("the limit decreases in beta") {
    double prev = manova_eta_limit(1.05);
    for (double beta = 1.1; beta < 6.0; beta += 0.1) {
      const double cur = manova_eta_limit(beta);
      CHECK(cur < prev);
      prev = cur;
    }
  }
  SUBCASE("densities integrate to one and the limit matches a midpoint oracle") {
    for (double r : {0.3, 0.5, 0.7}) {
      for (double beta : {1.25, 2.0, 3.0}) {
        const Support s = manova_support(r, beta);
        const auto f = [&](double x) { return manova_density(x, r, beta); };
        // With k + m > n a point mass (p + r - 1)/p sits at 1/r.
        const double p = r / beta;
        const double w = std::max(0.0, (p + r - 1.0) / p);
        CHECK(manova_atom(r, beta).weight == doctest::Approx(w));
        CHECK(oracle::midpoint_semicircle(f, s.lo, s.hi, 6000) + w == doctest::Approx(1.0).epsilon(1e-5));
        const double eta =
            oracle::midpoint_semicircle([&](double x) { return f(x) / x; }, s.lo, s.hi, 6000) / beta + w * r / beta;
        CHECK(eta == doctest::Approx((1.0 - p) / (beta - 1.0)).epsilon(1e-5));
        CHECK(manova_eta_limit(beta, r) == doctest::Approx(eta).epsilon(1e-5));
        CHECK(DensityCurve::manova(r, beta).total_mass() == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
  SUBCASE("centered and general routes agree") {
    for (double beta : {1.1, 1.5, 2.0, 4.0, 10.0})
      CHECK(manova_eta_limit_centered(beta) == doctest::Approx(manova_eta_limit(beta, 0.5)).epsilon(1e-8));
  }
}

TEST_CASE("quadrature helpers") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == doctest::Approx(9.0).epsilon(1e-12));
  // ∫ sqrt((x-lo)(hi-x)) = π h²/2
  const Support s{1.0, 3.0};
  CHECK(integrate_semicircle_weighted([](double) { return 1.0; }, s, 1.0, 3.0) ==
        doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
  CHECK(integrate_semicircle_weighted([](double) { return 1.0; }, s, 1.0, 2.0) ==
        doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-10));
  const DensityCurve mp = DensityCurve::marchenko_pastur(2.0);
  const Support sp = mp.support();
  const double mid = 0.5 * (sp.lo + sp.hi);
  CHECK(mp.mass(sp.lo, mid) + mp.mass(mid, sp.hi) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mp.mass(-1.0, 100.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eigen histograms") {
  const Frame f = build_random_iid(200, 100, Field::real, 5);
  const EigenHistogram h = eigen_histogram(f, 80, 40, 50, 11);
  CHECK(h.sample_count == 40 * 80);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() >= 2.0);
  CHECK(h.edges.back() >= h.max_eigenvalue);
  double mass = 0.0;
  for (int b = 0; b < h.bins(); ++b) mass += h.density[static_cast<std::size_t>(b)] * h.width();
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  const EigenHistogram again = eigen_histogram(f, 80, 40, 50, 11);
  CHECK(again.density == h.density);

  SUBCASE("fixed upper edge drops but still counts samples") {
    const EigenHistogram clipped = eigen_histogram(f, 80, 40, 50, 11, 1.0);
    double m2 = 0.0;
    for (double d : clipped.density) m2 += d * clipped.width();
    CHECK(m2 < 1.0);
    CHECK(clipped.sample_count == h.sample_count);
  }
  SUBCASE("L1 distance to Marchenko-Pastur is small and to a wrong law is large") {
    const double right = l1_distance(h, DensityCurve::marchenko_pastur(100.0 / 80.0));
    const double wrong = l1_distance(h, DensityCurve::marchenko_pastur(5.0));
    CHECK(right < 0.15);
    CHECK(wrong > 0.5);
  }
  SUBCASE("CSV layout") {
    std::ostringstream one;
    const std::vector<NamedDensity> single{{"mp", DensityCurve::marchenko_pastur(1.25)}};
    write_eigen_histogram_csv(one, h, single);
    CHECK(one.str().rfind("bin_center,empirical_density,reference_density\n", 0) == 0);
    std::ostringstream two;
    const std::vector<NamedDensity> pair{{"mp", DensityCurve::marchenko_pastur(1.25)},
                                         {"manova", DensityCurve::manova(0.5, 1.25)}};
    write_eigen_histogram_csv(two, h, pair, 0.2);
    CHECK(two.str().rfind("bin_center,empirical_density,mp_density,manova_density\n", 0) == 0);
    const std::string text = two.str();
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines < h.bins());
  }
  CHECK_THROWS(eigen_histogram(f, 101, 10, 10, 1));
}
