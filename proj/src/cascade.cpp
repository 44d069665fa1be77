#include "snp/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "snp/contest_state.hpp"
#include "snp/error.hpp"
#include "snp/rng.hpp"

namespace snp {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

SocialGraph small_world(const SmallWorld& p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::set<std::uint32_t>> adj(p.n);
  for (std::uint32_t u = 0; u < p.n; ++u) {
    for (std::uint32_t j = 1; j <= p.k / 2; ++j) {
      const std::uint32_t v = (u + j) % p.n;
      adj[u].insert(v);
      adj[v].insert(u);
    }
  }
  // Rewire lattice edge (u, u + j) from u's side, one ring distance at a time.
  for (std::uint32_t j = 1; j <= p.k / 2; ++j) {
    for (std::uint32_t u = 0; u < p.n; ++u) {
      const std::uint32_t v = (u + j) % p.n;
      if (!bernoulli(rng, p.beta)) continue;
      if (!adj[u].contains(v) || adj[u].size() >= p.n - 1) continue;
      std::uint32_t w;
      do {
        w = static_cast<std::uint32_t>(uniform_below(rng, p.n));
      } while (w == u || adj[u].contains(w));
      adj[u].erase(v);
      adj[v].erase(u);
      adj[u].insert(w);
      adj[w].insert(u);
    }
  }
  std::vector<std::vector<std::uint32_t>> out(p.n);
  for (std::uint32_t u = 0; u < p.n; ++u) out[u].assign(adj[u].begin(), adj[u].end());
  return SocialGraph(std::move(out));
}

SocialGraph scale_free(const ScaleFree& p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> adj(p.n);
  std::vector<std::uint32_t> targets(p.m);
  for (std::uint32_t i = 0; i < p.m; ++i) targets[i] = i;
  // Every edge endpoint appears once, so uniform picks are degree-weighted.
  std::vector<std::uint32_t> repeated;
  repeated.reserve(2ULL * p.m * p.n);
  for (std::uint32_t source = p.m; source < p.n; ++source) {
    for (const std::uint32_t t : targets) {
      adj[source].push_back(t);
      adj[t].push_back(source);
      repeated.push_back(t);
      repeated.push_back(source);
    }
    std::set<std::uint32_t> picked;
    while (picked.size() < p.m) picked.insert(repeated[uniform_below(rng, repeated.size())]);
    targets.assign(picked.begin(), picked.end());
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return SocialGraph(std::move(adj));
}

}  // namespace

void GraphSpec::validate() const {
  if (const auto* ws = std::get_if<SmallWorld>(&model)) {
    if (ws->n < 2) invalid("small_world needs n >= 2");
    if (ws->k < 2 || ws->k % 2 != 0 || ws->k >= ws->n) invalid("small_world needs even k with 2 <= k < n");
    if (!is_probability(ws->beta)) invalid("small_world beta must lie in [0, 1]");
  } else {
    const auto& ba = std::get<ScaleFree>(model);
    if (ba.n < 2) invalid("scale_free needs n >= 2");
    if (ba.m < 1 || ba.m >= ba.n) invalid("scale_free needs 1 <= m < n");
  }
}

SocialGraph::SocialGraph(std::vector<std::vector<std::uint32_t>> adjacency) : adj_(std::move(adjacency)) {
  std::uint64_t degree_sum = 0;
  for (auto& a : adj_) {
    std::sort(a.begin(), a.end());
    degree_sum += a.size();
  }
  edges_ = degree_sum / 2;
}

bool SocialGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  return u < adj_.size() && std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> SocialGraph::edge_list() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edges_);
  for (std::uint32_t u = 0; u < adj_.size(); ++u) {
    for (const std::uint32_t v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<std::uint32_t> SocialGraph::distances_from(std::span<const std::uint32_t> sources) const {
  std::vector<std::uint32_t> dist(adj_.size(), UINT32_MAX);
  std::deque<std::uint32_t> queue;
  for (const auto s : sources) {
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (const auto v : adj_[u]) {
      if (dist[v] == UINT32_MAX) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

SocialGraph generate_graph(const GraphSpec& spec) {
  spec.validate();
  if (const auto* ws = std::get_if<SmallWorld>(&spec.model)) return small_world(*ws, spec.seed);
  return scale_free(std::get<ScaleFree>(spec.model), spec.seed);
}

std::string_view to_string(IncentiveKind kind) {
  return kind == IncentiveKind::flat ? "flat" : "recursive";
}

IncentiveKind parse_incentive(std::string_view text) {
  if (text == "flat") return IncentiveKind::flat;
  if (text == "recursive") return IncentiveKind::recursive;
  invalid("unknown incentive '" + std::string(text) + "'");
}

double expected_chain_value(Rational decay, std::optional<std::uint32_t> horizon) {
  const double r = decay.to_double();
  if (!horizon || *horizon == 0) return 1.0 / (1.0 - r);
  return (1.0 - std::pow(r, static_cast<double>(*horizon))) / (1.0 - r);
}

void IncentiveModel::validate() const {
  for (const double p : {p_click, p_join, base_share, p_author, p_finalist}) {
    if (!is_probability(p)) invalid("incentive probabilities must lie in [0, 1]");
  }
  if (!std::isfinite(finalist_depth_slope)) invalid("finalist_depth_slope must be finite");
  if (decay.den <= 0 || decay.num <= 0 || decay.num >= decay.den) invalid("decay must lie in (0, 1)");
}

double IncentiveModel::share_probability() const {
  if (kind == IncentiveKind::flat) return base_share;
  return std::min(1.0, base_share * expected_chain_value(decay, reward_depth));
}

std::string sim_visitor(std::uint32_t u) { return "v" + std::to_string(u); }

namespace {

class EventSink {
 public:
  explicit EventSink(std::vector<EventRecord>& out) : out_(out) {}

  void start_layer(std::uint32_t layer) {
    // One tick (1000 s) per breadth layer; events inside a layer are spaced
    // 1 us apart in emission order.
    base_ = Timestamp::from_seconds(kEpochSeconds + 1000LL * layer);
    offset_ = 0;
  }
  void emit(EventPayload payload) {
    out_.push_back(EventRecord{out_.size() + 1, base_.plus_micros(offset_++), std::move(payload)});
  }

 private:
  static constexpr std::int64_t kEpochSeconds = 1396310400;  // 2014-04-01T00:00:00Z
  std::vector<EventRecord>& out_;
  Timestamp base_;
  std::int64_t offset_ = 0;
};

}  // namespace

CascadeResult simulate(const SocialGraph& graph, const IncentiveModel& model,
                       std::span<const std::uint32_t> seeds, std::uint64_t rng_seed) {
  model.validate();
  if (seeds.empty()) invalid("simulate needs at least one seed node");
  std::vector<std::uint32_t> seed_list(seeds.begin(), seeds.end());
  std::sort(seed_list.begin(), seed_list.end());
  seed_list.erase(std::unique(seed_list.begin(), seed_list.end()), seed_list.end());
  if (seed_list.back() >= graph.node_count()) invalid("seed node out of range");

  const double p_share = model.share_probability();
  const std::uint32_t n = graph.node_count();
  Rng rng(rng_seed);
  CascadeResult result;
  EventSink sink(result.events);

  std::vector<char> informed(n, 0), clicked(n, 0), has_token(n, 0);
  auto token_of = [](std::uint32_t u) { return "t" + std::to_string(u); };

  sink.start_layer(0);
  const std::string staff_token = "staff-start";
  sink.emit(LinkCreated{staff_token, "staff", std::nullopt, true, false});
  for (const auto s : seed_list) {
    sink.emit(MemberRegistered{sim_visitor(s), "m" + std::to_string(s)});
    sink.emit(Click{staff_token, sim_visitor(s), std::nullopt});
    informed[s] = clicked[s] = 1;
  }

  std::vector<std::uint32_t> frontier = seed_list;
  for (std::uint32_t layer = 0; !frontier.empty(); ++layer) {
    sink.start_layer(layer + 1);
    result.max_depth = layer;
    if (result.recruits_by_depth.size() <= layer) result.recruits_by_depth.resize(layer + 1, 0);
    std::vector<std::uint32_t> next;
    for (const auto u : frontier) {
      if (layer > 0 && bernoulli(rng, model.p_join)) {
        sink.emit(MemberRegistered{sim_visitor(u), "m" + std::to_string(u)});
        ++result.recruits_by_depth[layer];
        ++result.recruits;
        if (layer >= 2) ++result.indirect_recruits;
        if (bernoulli(rng, model.p_author)) {
          const std::string proposal = "p" + std::to_string(u);
          sink.emit(ProposalAuthored{"m" + std::to_string(u), proposal});
          const double p_fin = std::clamp(
              model.p_finalist + model.finalist_depth_slope * static_cast<double>(layer - 1), 0.0, 1.0);
          if (bernoulli(rng, p_fin)) sink.emit(ProposalResult{proposal, ProposalStatus::finalist});
        }
      }
      for (const auto v : graph.neighbors(u)) {
        if (clicked[v] || !bernoulli(rng, p_share)) continue;
        informed[v] = 1;
        if (!bernoulli(rng, model.p_click)) continue;
        if (!has_token[u]) {
          sink.emit(LinkCreated{token_of(u), sim_visitor(u), std::nullopt, false, false});
          has_token[u] = 1;
        }
        sink.emit(Click{token_of(u), sim_visitor(v), std::nullopt});
        clicked[v] = 1;
        next.push_back(v);
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }

  result.total_informed = static_cast<std::uint64_t>(std::count(informed.begin(), informed.end(), 1));
  result.clicked = static_cast<std::uint64_t>(std::count(clicked.begin(), clicked.end(), 1));
  return result;
}

bool log_validates(const std::vector<EventRecord>& events) {
  try {
    std::ostringstream text;
    for (const auto& e : events) text << encode_line(e) << '\n';
    std::istringstream in(text.str());
    const ContestState state = replay(in);
    return !state.graph().find_invariant_violation();
  } catch (const std::exception&) {
    return false;
  }
}

bool emitted_log_validates(const CascadeResult& result) {
  try {
    std::ostringstream text;
    for (const auto& e : result.events) text << encode_line(e) << '\n';
    std::istringstream in(text.str());
    const ContestState state = replay(in);
    const ReferralGraph& g = state.graph();
    if (g.find_invariant_violation()) return false;
    const NetworkCounts counts = g.network_counts();
    std::uint64_t histogram = 0;
    for (const auto c : result.recruits_by_depth) histogram += c;
    return counts.new_recruits == result.recruits && counts.indirect == result.indirect_recruits &&
           histogram == result.recruits && counts.clickers == result.clicked;
  } catch (const std::exception&) {
    return false;
  }
}

namespace {

TrialSummary summarize(std::uint32_t trial, IncentiveKind kind, const CascadeResult& r) {
  return {trial, kind, r.max_depth, r.recruits, r.indirect_recruits, r.total_informed};
}

}  // namespace

std::vector<TrialSummary> run_trials(const SocialGraph& graph, const IncentiveModel& model,
                                     std::span<const std::uint32_t> seeds,
                                     std::uint64_t base_seed, std::uint32_t trials) {
  model.validate();
  std::vector<TrialSummary> out(trials);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      const auto trial = static_cast<std::uint32_t>(i);
      out[i] = summarize(trial, model.kind, simulate(graph, model, seeds, mix_seed(base_seed, trial)));
    } catch (...) {
#pragma omp critical(snp_trial_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<TrialSummary> run_trials_serial(const SocialGraph& graph, const IncentiveModel& model,
                                            std::span<const std::uint32_t> seeds,
                                            std::uint64_t base_seed, std::uint32_t trials) {
  std::vector<TrialSummary> out;
  out.reserve(trials);
  for (std::uint32_t trial = 0; trial < trials; ++trial) {
    out.push_back(summarize(trial, model.kind, simulate(graph, model, seeds, mix_seed(base_seed, trial))));
  }
  return out;
}

std::vector<std::uint32_t> pick_seeds(std::uint32_t node_count, std::uint32_t count, std::uint64_t seed) {
  if (count == 0 || count > node_count) invalid("seed count must lie in [1, node_count]");
  std::vector<std::uint32_t> ids(node_count);
  for (std::uint32_t i = 0; i < node_count; ++i) ids[i] = i;
  Rng rng(seed);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(uniform_below(rng, node_count - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace snp
