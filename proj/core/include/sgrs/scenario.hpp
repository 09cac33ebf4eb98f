#pragma once

#include "sgrs/analytic.hpp"
#include "sgrs/engine.hpp"
#include "sgrs/properties.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace sgrs {

inline constexpr std::string_view scenario_schema = "sgrs-scenario/1";

struct ParseError : Error
{
  using Error::Error;
};

struct ValidationError : Error
{
  using Error::Error;
};

struct GroupSpec
{
  GroupId id;
  std::vector<MemberId> members;
};

struct Scenario
{
  std::uint64_t seed = 0;
  std::vector<GroupSpec> groups;
  std::optional<std::size_t> cascade_fanout; // set to build a cascade over the groups
  SizeModel sizes;
  std::vector<MembershipEvent> events;
  std::vector<Property> checks;
};

// Throws ParseError naming the line or field at fault.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Replays membership symbolically; throws ValidationError naming the event.
void validate_scenario(const Scenario& s);

struct RunReport
{
  Scenario scenario;
  Mutation mutation = Mutation::None;
  std::unique_ptr<Simulation> sim;
  std::vector<Reconciliation> reconciliations;
  std::vector<std::size_t> reconciled_events; // event index for each reconciliation
  std::vector<Verdict> verdicts;

  bool invariants_hold() const;
  bool properties_hold() const;
};

// Validates, then runs every event in order. Engine refusals propagate as Refused.
RunReport run_scenario(const Scenario& s, Mutation mutation = Mutation::None);

// Also runs the scenario's property checks, or `props` when given.
void run_checks(RunReport& r, std::span<const Property> props);

std::string render_report(const RunReport& r);
std::string render_transcript(const RunReport& r);
std::string render_verdicts(const RunReport& r);

} // namespace sgrs
