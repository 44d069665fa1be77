#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "snp/error.hpp"
#include "snp/rng.hpp"
#include "snp/stats.hpp"

using namespace snp;
using doctest::Approx;

namespace {

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

ContingencyTable2x2 random_table(Rng& rng, std::uint64_t max_cell) {
  return {uniform_below(rng, max_cell + 1), uniform_below(rng, max_cell + 1),
          uniform_below(rng, max_cell + 1), uniform_below(rng, max_cell + 1)};
}

bool has_zero_margin(const ContingencyTable2x2& t) {
  return t.row1() == 0 || t.row2() == 0 || t.col1() == 0 || t.col2() == 0;
}

}  // namespace

TEST_CASE("chi2_sf against closed forms") {
  double worst = 0.0;
  for (int df = 1; df <= 10; ++df) {
    for (double x = 0.0; x <= 100.0; x += 0.37) {
      worst = std::max(worst, std::fabs(chi2_sf(x, df) - oracle::chi2_sf_closed(x, df)));
    }
    CHECK(chi2_sf(0.0, df) == 1.0);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("chi2_sf reference points") {
  CHECK(std::fabs(chi2_sf(3.19, 1) - 0.074) <= 0.002);
  CHECK(std::fabs(chi2_sf(3.8415, 1) - 0.05) <= 1e-4);
  // Numerical integration of the density.
  CHECK(std::fabs(chi2_sf(3.8415, 1) - oracle::chi2_sf_df1_simpson(3.8415)) <= 1e-10);
  CHECK(std::fabs(chi2_sf(2.5, 1) - oracle::chi2_sf_df1_simpson(2.5)) <= 1e-10);
  CHECK(chi2_sf(466.5, 1) > 0.0);
  CHECK(chi2_sf(466.5, 1) < 1e-100);
  CHECK_THROWS_AS(chi2_sf(-1.0, 1), Error);
  CHECK_THROWS_AS(chi2_sf(1.0, 0), Error);
  CHECK(chi2_sf(std::numeric_limits<double>::infinity(), 1) == 0.0);
  CHECK_THROWS_AS(chi2_sf(std::numeric_limits<double>::quiet_NaN(), 1), Error);
}

TEST_CASE("chi2_sf decreases in x") {
  for (int df : {1, 2, 5, 10}) {
    double prev = 1.0;
    for (double x = 0.05; x < 120.0; x += 0.05) {
      const double p = chi2_sf(x, df);
      REQUIRE(p <= prev);
      REQUIRE(p >= 0.0);
      prev = p;
    }
  }
}

TEST_CASE("regularized gamma halves sum to one") {
  for (double a : {0.5, 1.0, 3.5, 12.0}) {
    for (double x : {0.1, 1.0, 4.0, 30.0}) CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) == Approx(1.0));
  }
}

TEST_CASE("pearson chi-square") {
  const auto r = pearson_chi2({16, 41, 228, 999});
  REQUIRE(r.statistic);
  CHECK(std::fabs(*r.statistic - 3.19) <= 0.01);
  CHECK(std::fabs(r.p_value - 0.074) <= 0.002);
  CHECK(r.df == 1);
  CHECK(r.method == TestMethod::pearson_chi2);

  const auto flat = pearson_chi2({10, 10, 10, 10});
  CHECK(*flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);

  const auto big = pearson_chi2({57, 294, 1227, 76812});
  CHECK(rel_err(*big.statistic, oracle::to_double(oracle::chi2_rational(57, 294, 1227, 76812))) < 1e-12);
  CHECK(*big.statistic < 78390.0);  // the 137353 reported for this table is out of range
  CHECK(big.p_value < 0.001);

  for (const ContingencyTable2x2 t : {ContingencyTable2x2{0, 0, 3, 4}, {0, 5, 0, 5}, {3, 0, 4, 0}, {0, 0, 0, 0}}) {
    try {
      pearson_chi2(t);
      FAIL("expected degenerate_table");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_table);
    }
  }
}

TEST_CASE("pearson matches the textbook and exact-rational oracles") {
  Rng rng(5);
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto t = random_table(rng, i % 3 == 0 ? 50 : 100000);
    if (has_zero_margin(t)) continue;
    const double stat = *pearson_chi2(t).statistic;
    const double exact = oracle::to_double(oracle::chi2_rational(t.a, t.b, t.c, t.d));
    CHECK(rel_err(stat, exact) < 1e-12);
    if (exact > 1e-6) CHECK(rel_err(stat, oracle::chi2_textbook(t.a, t.b, t.c, t.d)) < 1e-9);
    ++checked;
  }
  CHECK(checked > 2900);
}

TEST_CASE("hypergeometric pmf") {
  CHECK(hypergeom_pmf(1, 2, 1, 1) == Approx(0.5));
  double sum = 0;
  for (std::uint64_t k = 0; k <= 20; ++k) sum += hypergeom_pmf(k, 100, 30, 20);
  CHECK(sum == Approx(1.0).epsilon(1e-12));
  CHECK(rel_err(hypergeom_pmf(5, 50, 10, 25), oracle::to_double(oracle::hypergeom_exact(5, 50, 10, 25))) < 1e-12);
  // 22770 / 82861, reduced by hand from C(10,5) C(40,20) / C(50,25).
  CHECK(rel_err(hypergeom_pmf(5, 50, 10, 25), 22770.0 / 82861.0) < 1e-12);
  CHECK(hypergeom_pmf(11, 50, 10, 25) == 0.0);
  CHECK(hypergeom_pmf(0, 50, 40, 25) == 0.0);  // needs k >= n + K - N = 15
}

TEST_CASE("fisher exact, two-sided") {
  CHECK(std::fabs(fisher_exact_two_sided({52, 257, 5, 37}).p_value - 0.509) <= 0.005);
  CHECK(std::fabs(fisher_exact_two_sided({13, 39, 3, 2}).p_value - 0.129) <= 0.005);
  CHECK(fisher_exact_two_sided({1, 0, 0, 1}).p_value == Approx(1.0));
  const auto r = fisher_exact_two_sided({3, 1, 1, 3});
  CHECK_FALSE(r.statistic);
  CHECK(r.method == TestMethod::fisher_exact_two_sided);
  CHECK(fisher_exact_two_sided({0, 0, 0, 7}).p_value == 1.0);
  CHECK_THROWS_AS(fisher_exact_two_sided({0, 0, 0, 0}), Error);
}

TEST_CASE("fisher matches exhaustive rational enumeration") {
  Rng rng(11);
  for (int i = 0; i < 150; ++i) {
    std::uint64_t cells[4];
    const std::uint64_t n = 1 + uniform_below(rng, 200);
    // Random composition of n into four cells.
    std::uint64_t cuts[3] = {uniform_below(rng, n + 1), uniform_below(rng, n + 1), uniform_below(rng, n + 1)};
    std::sort(cuts, cuts + 3);
    cells[0] = cuts[0];
    cells[1] = cuts[1] - cuts[0];
    cells[2] = cuts[2] - cuts[1];
    cells[3] = n - cuts[2];
    const ContingencyTable2x2 t{cells[0], cells[1], cells[2], cells[3]};
    CAPTURE(t.a);
    CAPTURE(t.b);
    CAPTURE(t.c);
    CAPTURE(t.d);
    CHECK(std::fabs(fisher_exact_two_sided(t).p_value - oracle::fisher_exhaustive(t.a, t.b, t.c, t.d)) <= 1e-12);
  }
}

TEST_CASE("fisher stays accurate at N near 10,000") {
  const ContingencyTable2x2 t{40, 4960, 70, 4930};
  const double p = fisher_exact_two_sided(t).p_value;
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(rel_err(p, oracle::fisher_exhaustive(t.a, t.b, t.c, t.d)) < 1e-9);
}

TEST_CASE("pearson and fisher reach the same verdict on well-populated tables") {
  Rng rng(3);
  int close = 0, total = 0;
  while (total < 1000) {
    const auto t = random_table(rng, 60);
    if (has_zero_margin(t)) continue;
    const double N = static_cast<double>(t.total());
    const double emin = std::min({t.row1() * 1.0 * t.col1(), t.row1() * 1.0 * t.col2(), t.row2() * 1.0 * t.col1(),
                                  t.row2() * 1.0 * t.col2()}) / N;
    if (emin < 5.0) continue;
    ++total;
    if ((pearson_chi2(t).p_value < 0.05) == (fisher_exact_two_sided(t).p_value < 0.05)) ++close;
  }
  CHECK(close >= 950);
}

TEST_CASE("survey test delegates to pearson") {
  const auto r = survey_chi2({44, 55}, {1364, 2552});
  CHECK(std::fabs(*r.statistic - 15.5) <= 1.0);
  CHECK(*r.statistic == *pearson_chi2({44, 11, 1364, 1188}).statistic);
  CHECK(*survey_chi2({10, 20}, {50, 100}).statistic == Approx(0.0));
  CHECK_THROWS_AS(survey_chi2({5, 4}, {1, 1}), Error);
}

TEST_CASE("batch kernels are identical to their serial references") {
  Rng rng(8);
  std::vector<ContingencyTable2x2> tables;
  for (int i = 0; i < 500; ++i) tables.push_back(random_table(rng, i % 10 == 0 ? 3 : 400));
  tables.push_back({0, 0, 0, 0});
  const auto pb = pearson_chi2_batch(tables), ps = pearson_chi2_batch_serial(tables);
  const auto fb = fisher_exact_batch(tables), fs = fisher_exact_batch_serial(tables);
  REQUIRE(pb.size() == tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const bool nan = std::isnan(ps[i].p_value);
    CHECK(nan == std::isnan(pb[i].p_value));
    if (!nan) CHECK(pb[i].p_value == ps[i].p_value);
    const bool both_nan = std::isnan(fb[i].p_value) && std::isnan(fs[i].p_value);
    CHECK((both_nan || fb[i].p_value == fs[i].p_value));
    CHECK(nan == has_zero_margin(tables[i]));
  }
  CHECK(std::isnan(fb.back().p_value));
}

TEST_CASE("test results serialize") {
  const auto j = to_json(pearson_chi2({16, 41, 228, 999}));
  CHECK(j["method"] == "pearson_chi2");
  CHECK(j["df"] == 1);
  CHECK(j["statistic"].get<double>() == Approx(3.1859).epsilon(1e-4));
  const auto f = to_json(fisher_exact_two_sided({1, 0, 0, 1}));
  CHECK(f["statistic"].is_null());
}

TEST_CASE("bootstrap interval for a difference of means") {
  std::vector<double> x, y;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    x.push_back(5.0 + uniform01(rng));
    y.push_back(4.0 + uniform01(rng));
  }
  const auto ci = bootstrap_mean_difference(x, y, 2000, 0.95, 17);
  CHECK(ci.lo < 1.0);
  CHECK(ci.hi > 1.0);
  CHECK(ci.lo > 0.8);
  CHECK(ci.excludes_zero());
  const auto again = bootstrap_mean_difference(x, y, 2000, 0.95, 17);
  CHECK(again.lo == ci.lo);
  CHECK(again.hi == ci.hi);

  const auto same = bootstrap_mean_difference(x, x, 2000, 0.95, 3);
  CHECK_FALSE(same.excludes_zero());
  CHECK_THROWS_AS(bootstrap_mean_difference({}, y, 100, 0.95, 1), Error);
  CHECK_THROWS_AS(bootstrap_mean_difference(x, y, 100, 1.5, 1), Error);
}
