#include "snp/kernels.hpp"

#include <cstdint>

namespace snp {

namespace {

std::size_t chain_length(const ReferralGraph& graph, const VisitorId& id) {
  std::size_t n = 0;
  for (const ReferralEdge* e = graph.parent_edge(id); e != nullptr; e = graph.parent_edge(e->parent)) ++n;
  return n;
}

}  // namespace

std::vector<Classification> classify_batch(const ReferralGraph& graph, std::span<const VisitorId> ids) {
  std::vector<Classification> out(ids.size(), Classification{Kind::passive_clicker, std::nullopt});
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) out[i] = graph.classify(ids[i]);
  return out;
}

std::vector<Classification> classify_batch_serial(const ReferralGraph& graph,
                                                  std::span<const VisitorId> ids) {
  std::vector<Classification> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(graph.classify(id));
  return out;
}

std::vector<std::size_t> chain_lengths(const ReferralGraph& graph, std::span<const VisitorId> ids) {
  std::vector<std::size_t> out(ids.size(), 0);
  const auto n = static_cast<std::int64_t>(ids.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) out[i] = chain_length(graph, ids[i]);
  return out;
}

std::vector<std::size_t> chain_lengths_serial(const ReferralGraph& graph,
                                              std::span<const VisitorId> ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(chain_length(graph, id));
  return out;
}

}  // namespace snp
