#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "noisebench/core/rng.hpp"
#include "noisebench/noise.hpp"

using namespace noisebench;

TEST_CASE("symmetric matrix matches the closed form") {
  SECTION("c=3, eps=0.5") {
    const auto m = build_symmetric_matrix(3, 0.5);
    m.check_row_stochastic();
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) CHECK(m(k, i) == Catch::Approx(i == k ? 0.5 : 0.25).margin(1e-15));
  }
  SECTION("eps=0 is the identity") {
    const auto m = build_symmetric_matrix(4, 0.0);
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 4; ++i) CHECK(m(k, i) == (i == k ? 1.0 : 0.0));
  }
  SECTION("c=9 at the flipping threshold is uniform") {
    const auto m = build_symmetric_matrix(9, 8.0 / 9.0);
    for (int k = 0; k < 9; ++k)
      for (int i = 0; i < 9; ++i) CHECK(m(k, i) == Catch::Approx(1.0 / 9.0).margin(1e-15));
  }
  SECTION("preconditions") {
    CHECK_THROWS_AS(build_symmetric_matrix(1, 0.1), DataError);
    CHECK_THROWS_AS(build_symmetric_matrix(3, 1.5), DataError);
  }
}

TEST_CASE("dependent matrix: group structure") {
  SECTION("COVID pair group") {
    const auto m = build_dependent_matrix(3, 0.3, {{0, 1}});
    m.check_row_stochastic();
    CHECK(m(0, 0) == Catch::Approx(0.7));
    CHECK(m(0, 1) == Catch::Approx(0.3));
    CHECK(m(0, 2) == 0.0);
    CHECK(m(1, 0) == Catch::Approx(0.3));
    // ungrouped class: identity row
    CHECK(m(2, 2) == 1.0);
    CHECK(m(2, 0) == 0.0);
  }
  SECTION("Fetal 4-plane group at eps=0.6") {
    const auto m = build_dependent_matrix(6, 0.6, {{0, 1, 2, 3}});
    m.check_row_stochastic();
    CHECK(m(0, 0) == Catch::Approx(0.4));
    for (int i : {1, 2, 3}) CHECK(m(0, i) == Catch::Approx(0.2));
    CHECK(m(0, 4) == 0.0);
    CHECK(m(4, 4) == 1.0);
    CHECK(m(5, 5) == 1.0);
  }
  SECTION("singleton group behaves like no group") {
    const auto m = build_dependent_matrix(3, 0.5, {{0}});
    CHECK(m(0, 0) == 1.0);
  }
  SECTION("errors") {
    CHECK_THROWS_AS(build_dependent_matrix(3, 0.5, {{0, 1}, {1, 2}}), DataError);
    CHECK_THROWS_AS(build_dependent_matrix(3, 0.5, {{0, 7}}), DataError);
  }
}

TEST_CASE("inject: identity matrix leaves labels alone") {
  std::vector<int> labels(500);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  const auto m = build_symmetric_matrix(4, 0.0);
  const auto noisy = inject(labels, m, 42);
  CHECK(noisy.observed == labels);
  CHECK(noisy.flip_count() == 0);
}

TEST_CASE("inject: deterministic and flip-mask consistent") {
  std::vector<int> labels(2000);
  Rng rng(5);
  for (auto& y : labels) y = static_cast<int>(rng.below(3));
  const auto m = build_symmetric_matrix(3, 0.4);
  const auto a = inject(labels, m, 7);
  const auto b = inject(labels, m, 7);
  CHECK(a.observed == b.observed);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(a.flipped[i] == (a.observed[i] != labels[i]));
  const auto c = inject(labels, m, 8);
  CHECK(a.observed != c.observed);
}

TEST_CASE("inject: empirical flip rate within 3 sigma at eps=0.5") {
  const std::size_t n = 100000;
  std::vector<int> labels(n);
  Rng rng(11);
  for (auto& y : labels) y = static_cast<int>(rng.below(3));
  const auto m = build_symmetric_matrix(3, 0.5);
  const auto noisy = inject(labels, m, 123);
  const double frac = static_cast<double>(noisy.flip_count()) / static_cast<double>(n);
  const double sigma = std::sqrt(0.25 / static_cast<double>(n));
  CHECK(std::abs(frac - 0.5) <= 3.0 * sigma);
}

TEST_CASE("inject: out-of-range label") {
  const auto m = build_symmetric_matrix(3, 0.2);
  CHECK_THROWS_AS(inject({0, 3}, m, 1), DataError);
}

TEST_CASE("audit: inverse of inject within multinomial error") {
  const std::size_t n = 100000;
  std::vector<int> labels(n);
  Rng rng(3);
  for (auto& y : labels) y = static_cast<int>(rng.below(4));
  const auto m = build_symmetric_matrix(4, 0.6);
  const auto noisy = inject(labels, m, 99);
  const auto res = audit(labels, noisy, 4);
  res.empirical.check_row_stochastic(1e-9);
  for (int k = 0; k < 4; ++k) {
    const double nk = static_cast<double>(res.class_counts[static_cast<std::size_t>(k)]);
    for (int i = 0; i < 4; ++i) {
      const double p = m(k, i);
      const double sigma = std::sqrt(p * (1.0 - p) / nk);
      CHECK(std::abs(res.empirical(k, i) - p) <= 3.0 * sigma + 1e-12);
    }
  }
}

TEST_CASE("audit: no flips gives identity; empty class flagged") {
  const std::vector<int> labels = {0, 0, 1};
  NoisyLabelSet noisy;
  noisy.observed = labels;
  noisy.flipped = {false, false, false};
  const auto res = audit(labels, noisy, 3);
  CHECK(res.empirical(0, 0) == 1.0);
  CHECK(res.empirical(1, 1) == 1.0);
  REQUIRE(res.empty_classes == std::vector<int>{2});
  for (int i = 0; i < 3; ++i) CHECK(res.empirical(2, i) == 0.0);

  NoisyLabelSet bad;
  bad.observed = {0};
  bad.flipped = {false};
  CHECK_THROWS_AS(audit(labels, bad, 3), DataError);
}

TEST_CASE("dependent inject never leaves the dependency group") {
  const int c = 6;
  const std::vector<std::vector<int>> groups = {{0, 1, 2, 3}};
  const auto m = build_dependent_matrix(c, 0.7, groups);
  std::vector<int> labels(20000);
  Rng rng(17);
  for (auto& y : labels) y = static_cast<int>(rng.below(c));
  const auto noisy = inject(labels, m, 4);
  const std::set<int> grp(groups[0].begin(), groups[0].end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (grp.count(labels[i]))
      CHECK(grp.count(noisy.observed[i]) == 1);
    else
      CHECK(noisy.observed[i] == labels[i]);
  }
}

TEST_CASE("noisy_posterior: hand product and algebraic cases") {
  SECTION("hand matrix-vector product") {
    const auto m = build_symmetric_matrix(3, 0.5);
    const auto p = noisy_posterior({0.6, 0.3, 0.1}, m);
    CHECK(p[0] == Catch::Approx(0.40).margin(1e-12));
    CHECK(p[1] == Catch::Approx(0.325).margin(1e-12));
    CHECK(p[2] == Catch::Approx(0.275).margin(1e-12));
  }
  SECTION("identity matrix preserves the posterior") {
    const auto m = build_symmetric_matrix(4, 0.0);
    const std::vector<double> clean = {0.1, 0.2, 0.3, 0.4};
    const auto p = noisy_posterior(clean, m);
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(p[i] == Catch::Approx(clean[i]).margin(1e-12));
  }
  SECTION("uniform matrix washes out any posterior") {
    const auto m = build_symmetric_matrix(9, 8.0 / 9.0);
    const auto p = noisy_posterior({1.0, 0, 0, 0, 0, 0, 0, 0, 0}, m);
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 9.0).margin(1e-12));
  }
  SECTION("output sums to 1") {
    const auto m = build_symmetric_matrix(5, 0.37);
    const auto p = noisy_posterior({0.5, 0.2, 0.1, 0.1, 0.1}, m);
    double sum = 0;
    for (double v : p) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("non-normalized input rejected") {
    const auto m = build_symmetric_matrix(3, 0.1);
    CHECK_THROWS_AS(noisy_posterior({0.5, 0.2, 0.1}, m), DataError);
  }
}

TEST_CASE("flipping_threshold") {
  NoiseSpec sym;
  sym.kind = NoiseKind::symmetric;
  CHECK(flipping_threshold(sym, 9) == Catch::Approx(8.0 / 9.0));
  CHECK(flipping_threshold(sym, 2) == Catch::Approx(0.5));

  NoiseSpec dep;
  dep.kind = NoiseKind::class_dependent;
  dep.groups = {{0, 1}};
  CHECK(flipping_threshold(dep, 3) == Catch::Approx(0.5));
  dep.groups = {{0, 1}, {2, 3, 4, 5}};
  CHECK(flipping_threshold(dep, 6) == Catch::Approx(0.5));  // min over groups
  dep.groups = {{2, 3, 4, 5}};
  CHECK(flipping_threshold(dep, 6) == Catch::Approx(0.75));
  dep.groups = {{0}};
  CHECK_THROWS_AS(flipping_threshold(dep, 3), DataError);
}

TEST_CASE("argmax preservation below the symmetric threshold") {
  // property: for eps < (c-1)/c - 1e-6 the noisy posterior keeps the argmax
  Rng rng(2024);
  for (int c : {2, 3, 9}) {
    const double threshold = static_cast<double>(c - 1) / c;
    for (int trial = 0; trial < 400; ++trial) {
      std::vector<double> clean(static_cast<std::size_t>(c));
      double sum = 0;
      for (auto& v : clean) {
        v = rng.uniform() + 1e-9;
        sum += v;
      }
      for (auto& v : clean) v /= sum;
      const auto arg = static_cast<std::size_t>(
          std::max_element(clean.begin(), clean.end()) - clean.begin());
      bool unique = true;
      for (std::size_t i = 0; i < clean.size(); ++i)
        if (i != arg && std::abs(clean[i] - clean[arg]) < 1e-9) unique = false;
      if (!unique) continue;
      const double eps = rng.uniform() * (threshold - 2e-6);
      const auto noisy = noisy_posterior(clean, build_symmetric_matrix(c, eps));
      const auto noisy_arg = static_cast<std::size_t>(
          std::max_element(noisy.begin(), noisy.end()) - noisy.begin());
      REQUIRE(noisy_arg == arg);
    }
  }
}

TEST_CASE("transition matrix CSV export") {
  const auto m = build_symmetric_matrix(3, 0.5);
  const auto path = "/tmp/nb_matrix.csv";
  m.save_csv(path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.5,0.25,0.25");
}
