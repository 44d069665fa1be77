#pragma once

// Data-parallel read-only passes over a graph snapshot. Each OpenMP kernel has
// a serial reference that must produce identical output.

#include <span>
#include <vector>

#include "snp/referral_graph.hpp"

namespace snp {

std::vector<Classification> classify_batch(const ReferralGraph& graph, std::span<const VisitorId> ids);
std::vector<Classification> classify_batch_serial(const ReferralGraph& graph,
                                                  std::span<const VisitorId> ids);

/// Chain lengths (number of ancestors) for each id.
std::vector<std::size_t> chain_lengths(const ReferralGraph& graph, std::span<const VisitorId> ids);
std::vector<std::size_t> chain_lengths_serial(const ReferralGraph& graph,
                                              std::span<const VisitorId> ids);

}  // namespace snp
