#pragma once

#include "cascade/click.hpp"
#include "cascade/embedding_matrix.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

using WarnFn = std::function<void(const std::string&)>;

// Builds one re-ranker training instance for a click pair: ranks the whole
// corpus by retriever score, keeps rank window [e, min(f, N)] (1-based),
// drops every article the query clicked, and samples up to M of the rest
// uniformly without replacement. The sample stream derives from
// (seed, query id), so mining order doesn't matter. Returns nothing — after
// a warning — when the window is empty after exclusions.
std::optional<RerankInstance> mine_local_negatives(const EmbeddingMatrix& index,
                                                   const std::vector<float>& query_vec,
                                                   const ClickPair& pair,
                                                   const std::vector<std::string>& clicked_ids,
                                                   const RerankTrainConfig& cfg,
                                                   std::uint64_t seed, const WarnFn& warn);

} // namespace cascade
