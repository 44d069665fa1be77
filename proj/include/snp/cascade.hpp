#pragma once

// Synthetic social graphs and referral cascades under flat and recursive
// incentives. Simulated cascades are emitted as ordinary contest event logs so
// the engine can replay and analyze them.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "snp/events.hpp"
#include "snp/payout.hpp"

namespace snp {

/// Ring lattice of n nodes, each joined to its k nearest neighbours, with each
/// lattice edge rewired with probability beta.
struct SmallWorld {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  double beta = 0.0;
};

/// Preferential attachment adding m edges per new node.
struct ScaleFree {
  std::uint32_t n = 0;
  std::uint32_t m = 0;
};

struct GraphSpec {
  std::variant<SmallWorld, ScaleFree> model;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Undirected simple graph with sorted adjacency lists.
class SocialGraph {
 public:
  SocialGraph() = default;
  explicit SocialGraph(std::vector<std::vector<std::uint32_t>> adjacency);

  std::uint32_t node_count() const { return static_cast<std::uint32_t>(adj_.size()); }
  std::uint64_t edge_count() const { return edges_; }
  std::span<const std::uint32_t> neighbors(std::uint32_t u) const { return adj_[u]; }
  bool has_edge(std::uint32_t u, std::uint32_t v) const;
  /// (u, v) pairs with u < v in lexicographic order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list() const;
  /// Breadth-first distances from `sources`; unreachable nodes get UINT32_MAX.
  std::vector<std::uint32_t> distances_from(std::span<const std::uint32_t> sources) const;

 private:
  std::vector<std::vector<std::uint32_t>> adj_;
  std::uint64_t edges_ = 0;
};

SocialGraph generate_graph(const GraphSpec& spec);

enum class IncentiveKind { flat, recursive };

std::string_view to_string(IncentiveKind kind);
IncentiveKind parse_incentive(std::string_view text);

struct IncentiveModel {
  IncentiveKind kind = IncentiveKind::recursive;
  double p_click = 0.5;
  double p_join = 0.1;
  /// Flat: the constant share probability. Recursive: scaled by the chain
  /// value a sharer can expect relative to a single direct referral.
  double base_share = 0.25;
  Rational decay{1, 2};
  /// Reward horizon in degrees; unbounded when absent.
  std::optional<std::uint32_t> reward_depth;

  // Optional proposal activity for joiners. The finalist probability grows
  // by `finalist_depth_slope` per degree beyond the first.
  double p_author = 0.0;
  double p_finalist = 0.0;
  double finalist_depth_slope = 0.0;

  void validate() const;
  double share_probability() const;
};

/// Sum of decay^(j-1) over j = 1..horizon (horizon 0 means unbounded): the
/// expected chain value in units of chain_base.
double expected_chain_value(Rational decay, std::optional<std::uint32_t> horizon);

struct CascadeResult {
  std::vector<EventRecord> events;
  std::uint32_t max_depth = 0;
  /// Index d counts nodes that joined at cascade depth d.
  std::vector<std::uint64_t> recruits_by_depth;
  std::uint64_t total_informed = 0;
  std::uint64_t clicked = 0;
  std::uint64_t recruits = 0;
  std::uint64_t indirect_recruits = 0;
};

/// Visitor id of simulated node `u`.
std::string sim_visitor(std::uint32_t u);

/// Seeds are pre-existing members reached by a staff link at depth 0. Each
/// clicked node then decides to join and shares with every neighbour that has
/// not clicked yet; a shared link is clicked with probability p_click.
/// Deterministic in (graph, model, seeds, rng_seed).
CascadeResult simulate(const SocialGraph& graph, const IncentiveModel& model,
                       std::span<const std::uint32_t> seeds, std::uint64_t rng_seed);

/// True when the events replay cleanly and the replayed graph is a sound
/// forest agreeing with the result's recruit counts.
bool emitted_log_validates(const CascadeResult& result);
bool log_validates(const std::vector<EventRecord>& events);

struct TrialSummary {
  std::uint32_t trial = 0;
  IncentiveKind incentive = IncentiveKind::flat;
  std::uint32_t max_depth = 0;
  std::uint64_t recruits = 0;
  std::uint64_t indirect_recruits = 0;
  std::uint64_t total_informed = 0;

  bool operator==(const TrialSummary&) const = default;
};

/// Trial i runs with seed mix_seed(base_seed, i). The OpenMP and serial
/// versions return identical summaries.
std::vector<TrialSummary> run_trials(const SocialGraph& graph, const IncentiveModel& model,
                                     std::span<const std::uint32_t> seeds,
                                     std::uint64_t base_seed, std::uint32_t trials);
std::vector<TrialSummary> run_trials_serial(const SocialGraph& graph, const IncentiveModel& model,
                                            std::span<const std::uint32_t> seeds,
                                            std::uint64_t base_seed, std::uint32_t trials);

/// First `count` node ids in a seeded random order.
std::vector<std::uint32_t> pick_seeds(std::uint32_t node_count, std::uint32_t count,
                                      std::uint64_t seed);

}  // namespace snp
