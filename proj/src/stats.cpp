#include "snp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "snp/error.hpp"
#include "snp/rng.hpp"

namespace snp {

using nlohmann::json;

std::string_view to_string(TestMethod method) {
  switch (method) {
    case TestMethod::pearson_chi2: return "pearson_chi2";
    case TestMethod::fisher_exact_two_sided: return "fisher_exact_two_sided";
  }
  return "unknown";
}

json to_json(const TestResult& r) {
  json j = {{"p_value", r.p_value}, {"method", std::string(to_string(r.method))}};
  j["statistic"] = r.statistic ? json(*r.statistic) : json(nullptr);
  j["df"] = r.df ? json(*r.df) : json(nullptr);
  return j;
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::invalid_argument, "gamma shape must be > 0");
  if (!(x >= 0.0) || std::isnan(x)) throw Error(ErrorCode::invalid_argument, "gamma argument must be >= 0");
}

std::optional<TestResult> pearson_nothrow(const ContingencyTable2x2& t) {
  const std::uint64_t n = t.total();
  const std::uint64_t rows[2] = {t.row1(), t.row2()};
  const std::uint64_t cols[2] = {t.col1(), t.col2()};
  if (n == 0 || rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0) return std::nullopt;

  const std::uint64_t observed[2][2] = {{t.a, t.b}, {t.c, t.d}};
  // (O - E)^2 / E with E = r c / N equals x^2 / (N r c), x = O N - r c,
  // where x is exact in 128-bit integers.
  long double stat = 0.0L;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const __int128 x = static_cast<__int128>(observed[i][j]) * n -
                         static_cast<__int128>(rows[i]) * cols[j];
      const long double xd = static_cast<long double>(x);
      stat += xd * xd /
              (static_cast<long double>(n) * static_cast<long double>(rows[i]) *
               static_cast<long double>(cols[j]));
    }
  }
  TestResult r;
  r.method = TestMethod::pearson_chi2;
  r.statistic = static_cast<double>(stat);
  r.df = 1;
  r.p_value = chi2_sf(*r.statistic, 1);
  return r;
}

std::optional<TestResult> fisher_nothrow(const ContingencyTable2x2& t) {
  const std::uint64_t N = t.total();
  if (N == 0) return std::nullopt;
  const std::uint64_t K = t.row1();
  const std::uint64_t n = t.col1();
  const std::uint64_t lo = n + K > N ? n + K - N : 0;
  const std::uint64_t hi = std::min(K, n);

  // Weights relative to the mode (the largest term), built outward with the
  // ratio w(k+1)/w(k) = (K-k)(n-k) / ((k+1)(N-K-n+k+1)).
  const auto mode = std::clamp<std::uint64_t>((n + 1) * (K + 1) / (N + 2), lo, hi);
  std::vector<double> w(hi - lo + 1, 0.0);
  w[mode - lo] = 1.0;
  for (std::uint64_t k = mode; k < hi; ++k) {
    const double num = static_cast<double>(K - k) * static_cast<double>(n - k);
    const double den = static_cast<double>(k + 1) * static_cast<double>(N - K - n + k + 1);
    w[k + 1 - lo] = w[k - lo] * (num / den);
  }
  for (std::uint64_t k = mode; k > lo; --k) {
    const double num = static_cast<double>(k) * static_cast<double>(N - K - n + k);
    const double den = static_cast<double>(K - k + 1) * static_cast<double>(n - k + 1);
    w[k - 1 - lo] = w[k - lo] * (num / den);
  }

  const double observed = w[t.a - lo] * (1.0 + 1e-7);
  double total = 0.0;
  double tail = 0.0;
  for (const double x : w) {
    total += x;
    if (x <= observed) tail += x;
  }
  TestResult r;
  r.method = TestMethod::fisher_exact_two_sided;
  r.p_value = std::clamp(tail / total, 0.0, 1.0);
  return r;
}

TestResult degenerate_result(TestMethod method) {
  TestResult r;
  r.method = method;
  r.p_value = std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi2_sf(double x, int df) {
  if (df < 1) throw Error(ErrorCode::invalid_argument, "chi-square df must be >= 1");
  if (std::isnan(x) || x < 0.0) throw Error(ErrorCode::invalid_argument, "chi-square statistic must be >= 0");
  return std::clamp(regularized_gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

TestResult pearson_chi2(const ContingencyTable2x2& t) {
  if (auto r = pearson_nothrow(t)) return *r;
  throw Error(ErrorCode::degenerate_table, "contingency table has a zero margin");
}

double hypergeom_pmf(std::uint64_t k, std::uint64_t N, std::uint64_t K, std::uint64_t n) {
  if (K > N || n > N) throw Error(ErrorCode::invalid_argument, "hypergeometric parameters need K, n <= N");
  if (k > K || k > n || n - k > N - K) return 0.0;
  auto log_choose = [](std::uint64_t a, std::uint64_t b) {
    return log_gamma(static_cast<double>(a) + 1.0) - log_gamma(static_cast<double>(b) + 1.0) -
           log_gamma(static_cast<double>(a - b) + 1.0);
  };
  return std::exp(log_choose(K, k) + log_choose(N - K, n - k) - log_choose(N, n));
}

TestResult fisher_exact_two_sided(const ContingencyTable2x2& t) {
  if (auto r = fisher_nothrow(t)) return *r;
  throw Error(ErrorCode::degenerate_table, "contingency table is empty");
}

TestResult survey_chi2(OutsideCounts recruits, OutsideCounts others) {
  if (recruits.outside > recruits.total || others.outside > others.total) {
    throw Error(ErrorCode::invalid_argument, "outside count exceeds group size");
  }
  return pearson_chi2({recruits.outside, recruits.total - recruits.outside, others.outside,
                       others.total - others.outside});
}

std::vector<TestResult> pearson_chi2_batch(std::span<const ContingencyTable2x2> tables) {
  std::vector<TestResult> out(tables.size());
  const auto n = static_cast<std::int64_t>(tables.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = pearson_nothrow(tables[i]);
    out[i] = r ? *r : degenerate_result(TestMethod::pearson_chi2);
  }
  return out;
}

std::vector<TestResult> pearson_chi2_batch_serial(std::span<const ContingencyTable2x2> tables) {
  std::vector<TestResult> out;
  out.reserve(tables.size());
  for (const auto& t : tables) {
    const auto r = pearson_nothrow(t);
    out.push_back(r ? *r : degenerate_result(TestMethod::pearson_chi2));
  }
  return out;
}

std::vector<TestResult> fisher_exact_batch(std::span<const ContingencyTable2x2> tables) {
  std::vector<TestResult> out(tables.size());
  const auto n = static_cast<std::int64_t>(tables.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = fisher_nothrow(tables[i]);
    out[i] = r ? *r : degenerate_result(TestMethod::fisher_exact_two_sided);
  }
  return out;
}

std::vector<TestResult> fisher_exact_batch_serial(std::span<const ContingencyTable2x2> tables) {
  std::vector<TestResult> out;
  out.reserve(tables.size());
  for (const auto& t : tables) {
    const auto r = fisher_nothrow(t);
    out.push_back(r ? *r : degenerate_result(TestMethod::fisher_exact_two_sided));
  }
  return out;
}

Interval bootstrap_mean_difference(std::span<const double> x, std::span<const double> y,
                                   std::size_t replicates, double level, std::uint64_t seed) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::invalid_argument, "bootstrap needs two nonempty samples");
  if (replicates < 2) throw Error(ErrorCode::invalid_argument, "bootstrap needs >= 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::invalid_argument, "level must be in (0, 1)");

  Rng rng(seed);
  auto resample_mean = [&](std::span<const double> s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) sum += s[uniform_below(rng, s.size())];
    return sum / static_cast<double>(s.size());
  };
  std::vector<double> diffs(replicates);
  for (auto& d : diffs) {
    const double mx = resample_mean(x);
    d = mx - resample_mean(y);
  }
  std::sort(diffs.begin(), diffs.end());
  const double alpha = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(replicates - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < replicates ? diffs[i] + frac * (diffs[i + 1] - diffs[i]) : diffs[i];
  };
  return {quantile(alpha), quantile(1.0 - alpha)};
}

}  // namespace snp
