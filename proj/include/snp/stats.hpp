#pragma once

// 2x2 contingency-table tests and the distribution functions behind them.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace snp {

/// Row 1 is the group of interest, column 1 the outcome of interest:
///
///              outcome   no outcome
///   group         a          b
///   rest          c          d
struct ContingencyTable2x2 {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;

  std::uint64_t total() const { return a + b + c + d; }
  std::uint64_t row1() const { return a + b; }
  std::uint64_t row2() const { return c + d; }
  std::uint64_t col1() const { return a + c; }
  std::uint64_t col2() const { return b + d; }

  bool operator==(const ContingencyTable2x2&) const = default;
};

enum class TestMethod { pearson_chi2, fisher_exact_two_sided };

std::string_view to_string(TestMethod method);

struct TestResult {
  std::optional<double> statistic;
  double p_value = 1.0;
  std::optional<int> df;
  TestMethod method = TestMethod::pearson_chi2;
};

nlohmann::json to_json(const TestResult& result);

/// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
/// Throws on x < 0, non-finite x, or df < 1.
double chi2_sf(double x, int df);

/// Uncorrected Pearson statistic (no Yates correction), df = 1. Throws
/// snp::Error(degenerate_table) when any margin is zero.
TestResult pearson_chi2(const ContingencyTable2x2& t);

/// C(K,k) C(N-K,n-k) / C(N,n) via log-gamma; 0 outside the support.
double hypergeom_pmf(std::uint64_t k, std::uint64_t N, std::uint64_t K, std::uint64_t n);

/// Two-sided Fisher exact test: sums the probabilities of all tables with the
/// observed margins that are no more probable than the observed table, with a
/// relative slack of 1e-7. Throws snp::Error(degenerate_table) when N = 0.
TestResult fisher_exact_two_sided(const ContingencyTable2x2& t);

struct OutsideCounts {
  std::uint64_t outside = 0;
  std::uint64_t total = 0;
};

/// Pearson test on (group outside, group inside, others outside, others inside).
TestResult survey_chi2(OutsideCounts recruits, OutsideCounts others);

// Batch kernels. The OpenMP versions must agree bit-for-bit with the serial
// references; each table is evaluated independently.
std::vector<TestResult> pearson_chi2_batch(std::span<const ContingencyTable2x2> tables);
std::vector<TestResult> pearson_chi2_batch_serial(std::span<const ContingencyTable2x2> tables);
std::vector<TestResult> fisher_exact_batch(std::span<const ContingencyTable2x2> tables);
std::vector<TestResult> fisher_exact_batch_serial(std::span<const ContingencyTable2x2> tables);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
};

/// Percentile bootstrap interval for mean(x) - mean(y), resampling each arm
/// independently with replacement.
Interval bootstrap_mean_difference(std::span<const double> x, std::span<const double> y,
                                   std::size_t replicates, double level, std::uint64_t seed);

}  // namespace snp
