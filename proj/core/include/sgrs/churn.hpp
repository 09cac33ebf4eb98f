#pragma once

#include "sgrs/engine.hpp"

#include <vector>

namespace sgrs {

struct ChurnConfig
{
  std::uint64_t seed = 1;
  std::size_t events = 200;
  std::size_t initial_size = 8;
  std::size_t max_groups = 3;
  std::size_t size_cap = 40;
  std::size_t min_size = 3; // every group keeps at least this many members
};

// Bootstraps group 1 and drives `sim` through random mixed events, each chosen
// from the current membership. Returns the events in the order applied.
std::vector<MembershipEvent> run_churn(Simulation& sim, const ChurnConfig& cfg);

} // namespace sgrs
