#pragma once

#include <cstdint>
#include <limits>
#include <unordered_set>

namespace wikinav {

/// Dense node index in [0, node_count).
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

using NodeSet = std::unordered_set<NodeId>;

}  // namespace wikinav
