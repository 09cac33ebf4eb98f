#pragma once

#include "sgrs/adversary.hpp"
#include "sgrs/engine.hpp"

#include <span>
#include <string>
#include <vector>

namespace sgrs {

enum class Property : std::uint8_t
{
  GroupKeySecrecy,
  BackwardSecrecy,
  ForwardSecrecy,          // each departed member on its own
  ForwardSecrecyCollusion, // members removed by one partition, pooled
  KeyIndependence,
};

inline constexpr std::array<Property, 5> all_properties{
  Property::GroupKeySecrecy,         Property::BackwardSecrecy, Property::ForwardSecrecy,
  Property::ForwardSecrecyCollusion, Property::KeyIndependence,
};

std::string_view property_name(Property p);
Property parse_property(std::string_view name); // throws ConfigError

struct Finding
{
  std::string attacker;
  std::string target; // what leaked, e.g. "G1 key @event 4"
  std::vector<std::string> witness;
  bool replayed = false;
};

struct Verdict
{
  Property property = Property::GroupKeySecrecy;
  std::size_t checks = 0; // attacker closures computed
  std::size_t leaks = 0;
  std::vector<Finding> findings; // the first few leaks, with witnesses

  bool pass() const { return leaks == 0; }
};

inline constexpr std::size_t max_findings = 3;

Verdict check_property(Property p, const Simulation& sim, const Evidence& ev);
std::vector<Verdict> check_properties(std::span<const Property> props, const Simulation& sim);

} // namespace sgrs
