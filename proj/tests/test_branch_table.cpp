#include <cmath>
#include <random>

#include "doctest.h"
#include "solbranch/branch_table.hpp"

using namespace solbranch;

TEST_CASE("probabilities and multipliers from raw coefficients") {
  const auto table = make_branch_table<double>({{"a", 2.0, 1.0}, {"b", -4.0, 2.0}});
  const auto& e = table.entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].probability == doctest::Approx(1.0 / 3.0));
  CHECK(e[1].probability == doctest::Approx(2.0 / 3.0));
  CHECK(e[0].multiplier == doctest::Approx(6.0));
  CHECK(e[1].multiplier == doctest::Approx(-6.0));
  CHECK(e[0].probability * e[0].multiplier == doctest::Approx(2.0));
  CHECK(e[1].probability * e[1].multiplier == doctest::Approx(-4.0));
}

TEST_CASE("constructor errors") {
  CHECK_THROWS_AS(make_branch_table<double>({{"a", 0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_branch_table<double>({{"a", 1.0, 0.0}, {"b", 1.0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_branch_table<double>({{"a", 1.0, -0.5}}), std::invalid_argument);
  // zero weight with zero coefficient: entry is dropped
  const auto t = make_branch_table<double>({{"a", 0.0, 0.0}, {"b", 3.0, 2.0}});
  CHECK(t.entries().size() == 1);
  CHECK(t.entries()[0].probability == doctest::Approx(1.0));
}

TEST_CASE("random tables satisfy the defining identities") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> coeff(-5.0, 5.0);
  std::uniform_real_distribution<double> weight(0.01, 4.0);
  std::uniform_int_distribution<int> count(1, 9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<RawBranch<double>> raw;
    const int n = count(gen);
    for (int i = 0; i < n; ++i)
      raw.push_back({"e" + std::to_string(i), coeff(gen), weight(gen)});
    const auto table = make_branch_table(raw);
    double sum_p = 0.0;
    for (size_t i = 0; i < table.entries().size(); ++i) {
      const auto& e = table.entries()[i];
      sum_p += e.probability;
      const double pm = e.probability * e.multiplier;
      CHECK(std::abs(pm - raw[i].coefficient) <=
            1e-12 * std::max(1.0, std::abs(raw[i].coefficient)));
    }
    CHECK(std::abs(sum_p - 1.0) <= 1e-12);
  }
}

TEST_CASE("poisson tail pmf values from the published tables") {
  CHECK(poisson_tail_pmf(1, 1) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));
  CHECK(poisson_tail_pmf(2, 2) == doctest::Approx(0.5 / (std::exp(1.0) - 2.0)).epsilon(1e-12));
  CHECK(poisson_tail_pmf(1, 1) == doctest::Approx(0.58198).epsilon(1e-4));
  CHECK(poisson_tail_pmf(2, 2) == doctest::Approx(0.69611).epsilon(1e-4));
}

TEST_CASE("poisson tail normalizations sum to one") {
  for (int min_j : {0, 1, 2}) {
    double sum = 0.0;
    for (int j = min_j; j < 60; ++j) sum += poisson_tail_pmf(j, min_j);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK(poisson_tail_norm(0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK(poisson_tail_norm(1) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(poisson_tail_norm(2) == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
}

TEST_CASE("poisson tail sampling matches the law") {
  RngStream s = split_stream(5, 1);
  const int n = 100000;
  double mean0 = 0.0;
  int count1_min1 = 0;
  for (int i = 0; i < n; ++i) {
    mean0 += sample_poisson_tail(s, 0);
    if (sample_poisson_tail(s, 1) == 1) ++count1_min1;
  }
  CHECK(mean0 / n == doctest::Approx(1.0).epsilon(0.01));  // Poisson(1) mean
  CHECK(static_cast<double>(count1_min1) / n ==
        doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) CHECK(sample_poisson_tail(s, 2) >= 2);
}

TEST_CASE("table sampling respects probabilities") {
  const auto table = make_branch_table<double>({{"a", 1.0, 1.0}, {"b", 1.0, 3.0}});
  RngStream s = split_stream(2, 2);
  int a = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    if (table.sample(s).tag == "a") ++a;
  CHECK(static_cast<double>(a) / n == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("complex coefficients") {
  using cd = std::complex<double>;
  const auto table = make_branch_table<cd>({{"g", cd(0.0, -2.0), 1.0}, {"h", cd(1.0, 0.0), 1.0}});
  CHECK(table.entries()[0].multiplier == cd(0.0, -4.0));
  CHECK(std::abs(table.entries()[0].probability * table.entries()[0].multiplier -
                 cd(0.0, -2.0)) < 1e-14);
}
