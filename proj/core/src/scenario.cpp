#include "sgrs/scenario.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sgrs {

namespace {

using nlohmann::json;

std::size_t
line_of(std::string_view text, std::size_t byte)
{
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

void
allow_only(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys)
{
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ParseError(where + "." + k + ": unknown field");
    }
  }
}

const json&
field(const json& obj, const std::string& where, const char* key)
{
  if (!obj.contains(key)) {
    throw ParseError(where + "." + key + ": missing");
  }
  return obj.at(key);
}

std::uint64_t
as_uint(const json& v, const std::string& where)
{
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ParseError(where + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint32_t
as_u32(const json& v, const std::string& where)
{
  const auto x = as_uint(v, where);
  if (x == 0 || x > 0xffffffffu) {
    throw ParseError(where + ": expected an id in 1..2^32-1");
  }
  return static_cast<std::uint32_t>(x);
}

std::vector<MemberId>
as_members(const json& v, const std::string& where)
{
  if (!v.is_array()) {
    throw ParseError(where + ": expected an array of member ids");
  }
  std::vector<MemberId> out;
  for (std::size_t i = 0; i < v.size(); i++) {
    out.emplace_back(as_u32(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::optional<MemberId>
optional_member(const json& obj, const std::string& where, const char* key)
{
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  return MemberId{ as_u32(obj.at(key), where + "." + key) };
}

MembershipEvent
parse_event(const json& e, const std::string& where)
{
  if (!e.is_object()) {
    throw ParseError(where + ": expected an object");
  }
  const auto& kind = field(e, where, "kind");
  if (!kind.is_string()) {
    throw ParseError(where + ".kind: expected a string");
  }
  const auto name = kind.get<std::string>();
  MembershipEvent out;
  if (name == "join" || name == "leave") {
    allow_only(e, where, { "kind", "group", "member", "sponsor" });
    out.kind = name == "join" ? EventKind::Join : EventKind::Leave;
    out.group = GroupId{ as_u32(field(e, where, "group"), where + ".group") };
    out.members = { MemberId{ as_u32(field(e, where, "member"), where + ".member") } };
    out.sponsor = optional_member(e, where, "sponsor");
  } else if (name == "partition") {
    allow_only(e, where, { "kind", "group", "members", "sponsor" });
    out.kind = EventKind::Partition;
    out.group = GroupId{ as_u32(field(e, where, "group"), where + ".group") };
    out.members = as_members(field(e, where, "members"), where + ".members");
    out.sponsor = optional_member(e, where, "sponsor");
  } else if (name == "merge") {
    allow_only(e, where, { "kind", "groups", "sponsor", "sponsor_b" });
    out.kind = EventKind::Merge;
    const auto& gs = field(e, where, "groups");
    if (!gs.is_array()) {
      throw ParseError(where + ".groups: expected an array of group ids");
    }
    for (std::size_t i = 0; i < gs.size(); i++) {
      out.groups.emplace_back(as_u32(gs[i], where + ".groups[" + std::to_string(i) + "]"));
    }
    out.sponsor = optional_member(e, where, "sponsor");
    out.sponsor_b = optional_member(e, where, "sponsor_b");
  } else if (name == "spawn") {
    allow_only(e, where, { "kind", "group", "members" });
    out.kind = EventKind::Spawn;
    out.group = GroupId{ as_u32(field(e, where, "group"), where + ".group") };
    out.members = as_members(field(e, where, "members"), where + ".members");
  } else {
    throw ParseError(where + ".kind: unknown event kind '" + name + "'");
  }
  return out;
}

std::string
event_name(std::size_t i, const MembershipEvent& e)
{
  return "event " + std::to_string(i) + " (" + describe(e) + ")";
}

} // namespace

Scenario
parse_scenario(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& err) {
    throw ParseError("line " + std::to_string(line_of(text, err.byte)) + ": " + err.what());
  }
  if (!doc.is_object()) {
    throw ParseError("line 1: top level must be an object");
  }
  allow_only(doc, "scenario", { "schema", "seed", "groups", "cascade", "sizes", "events", "checks" });

  const auto& schema = field(doc, "scenario", "schema");
  if (!schema.is_string() || schema.get<std::string>() != scenario_schema) {
    throw ParseError("scenario.schema: expected \"" + std::string(scenario_schema) + "\"");
  }

  Scenario s;
  if (doc.contains("seed")) {
    s.seed = as_uint(doc.at("seed"), "scenario.seed");
  }

  const auto& groups = field(doc, "scenario", "groups");
  if (!groups.is_array()) {
    throw ParseError("scenario.groups: expected an array");
  }
  for (std::size_t i = 0; i < groups.size(); i++) {
    const auto where = "groups[" + std::to_string(i) + "]";
    if (!groups[i].is_object()) {
      throw ParseError(where + ": expected an object");
    }
    allow_only(groups[i], where, { "id", "members" });
    s.groups.push_back({ GroupId{ as_u32(field(groups[i], where, "id"), where + ".id") },
                         as_members(field(groups[i], where, "members"), where + ".members") });
  }

  if (doc.contains("cascade")) {
    const auto& c = doc.at("cascade");
    if (!c.is_object()) {
      throw ParseError("scenario.cascade: expected an object");
    }
    allow_only(c, "cascade", { "fanout" });
    s.cascade_fanout = c.contains("fanout") ? as_uint(c.at("fanout"), "cascade.fanout") : 0;
  }

  if (doc.contains("sizes")) {
    const auto& z = doc.at("sizes");
    if (!z.is_object()) {
      throw ParseError("scenario.sizes: expected an object");
    }
    allow_only(z, "sizes", { "int", "key" });
    if (z.contains("int")) {
      s.sizes.int_bytes = static_cast<std::uint32_t>(as_uint(z.at("int"), "sizes.int"));
    }
    if (z.contains("key")) {
      s.sizes.key_bytes = static_cast<std::uint32_t>(as_uint(z.at("key"), "sizes.key"));
    }
  }

  if (doc.contains("events")) {
    const auto& events = doc.at("events");
    if (!events.is_array()) {
      throw ParseError("scenario.events: expected an array");
    }
    for (std::size_t i = 0; i < events.size(); i++) {
      s.events.push_back(parse_event(events[i], "events[" + std::to_string(i) + "]"));
    }
  }

  if (doc.contains("checks")) {
    const auto& checks = doc.at("checks");
    if (!checks.is_array()) {
      throw ParseError("scenario.checks: expected an array of property names");
    }
    for (std::size_t i = 0; i < checks.size(); i++) {
      if (!checks[i].is_string()) {
        throw ParseError("checks[" + std::to_string(i) + "]: expected a string");
      }
      try {
        s.checks.push_back(parse_property(checks[i].get<std::string>()));
      } catch (const ConfigError& err) {
        throw ParseError("checks[" + std::to_string(i) + "]: " + err.what());
      }
    }
  }
  return s;
}

Scenario
load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot read");
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str());
  } catch (const ParseError& err) {
    throw ParseError(path.string() + ": " + err.what());
  }
}

void
validate_scenario(const Scenario& s)
{
  std::map<GroupId, std::set<MemberId>> groups;
  std::set<MemberId> seen;
  auto claim = [&](MemberId id, const std::string& where) {
    if (!seen.insert(id).second) {
      throw ValidationError(where + ": member " + to_string(id) + " is already in use");
    }
  };
  for (const auto& g : s.groups) {
    const auto where = "group " + to_string(g.id);
    if (groups.count(g.id) != 0) {
      throw ValidationError(where + ": declared twice");
    }
    if (g.members.empty()) {
      throw ValidationError(where + ": no members");
    }
    for (auto id : g.members) {
      claim(id, where);
    }
    groups[g.id] = { g.members.begin(), g.members.end() };
  }
  if (s.cascade_fanout && groups.empty()) {
    throw ValidationError("cascade: no groups to build it over");
  }

  auto need_group = [&](GroupId gid, const std::string& where) -> std::set<MemberId>& {
    auto it = groups.find(gid);
    if (it == groups.end()) {
      throw ValidationError(where + ": no live group " + to_string(gid));
    }
    return it->second;
  };
  auto need_member = [](const std::set<MemberId>& g, MemberId id, const std::string& where,
                        const char* role) {
    if (g.count(id) == 0) {
      throw ValidationError(where + ": " + role + " " + to_string(id) + " is not in the group");
    }
  };

  for (std::size_t i = 0; i < s.events.size(); i++) {
    const auto& e = s.events[i];
    const auto where = event_name(i, e);
    switch (e.kind) {
      case EventKind::Join: {
        auto& g = need_group(e.group, where);
        if (e.sponsor) {
          need_member(g, *e.sponsor, where, "sponsor");
        }
        claim(e.members.front(), where);
        g.insert(e.members.front());
        break;
      }
      case EventKind::Leave:
      case EventKind::Partition: {
        auto& g = need_group(e.group, where);
        if (e.members.empty()) {
          throw ValidationError(where + ": names no member");
        }
        const std::set<MemberId> leaving(e.members.begin(), e.members.end());
        if (leaving.size() != e.members.size()) {
          throw ValidationError(where + ": names a member twice");
        }
        for (auto id : leaving) {
          need_member(g, id, where, "member");
        }
        if (e.sponsor) {
          need_member(g, *e.sponsor, where, "sponsor");
          if (leaving.count(*e.sponsor) != 0) {
            throw ValidationError(where + ": the sponsor is leaving");
          }
        }
        for (auto id : leaving) {
          g.erase(id);
        }
        break;
      }
      case EventKind::Merge: {
        if (e.groups.size() < 2) {
          throw ValidationError(where + ": needs at least 2 groups");
        }
        if (std::set<GroupId>(e.groups.begin(), e.groups.end()).size() != e.groups.size()) {
          throw ValidationError(where + ": names a group twice");
        }
        if ((e.sponsor || e.sponsor_b) && e.groups.size() != 2) {
          throw ValidationError(where + ": sponsors can only be named for a two-group merge");
        }
        for (auto gid : e.groups) {
          need_group(gid, where);
        }
        const auto a = std::min(e.groups[0], e.groups[1]);
        const auto b = std::max(e.groups[0], e.groups[1]);
        if (e.sponsor) {
          need_member(groups[a], *e.sponsor, where, "sponsor");
        }
        if (e.sponsor_b) {
          need_member(groups[b], *e.sponsor_b, where, "sponsor_b");
        }
        // The merged group keeps the lowest id.
        const auto keep = *std::min_element(e.groups.begin(), e.groups.end());
        std::set<MemberId> all;
        for (auto gid : e.groups) {
          all.insert(groups[gid].begin(), groups[gid].end());
          groups.erase(gid);
        }
        groups[keep] = std::move(all);
        break;
      }
      case EventKind::Spawn: {
        if (groups.count(e.group) != 0) {
          throw ValidationError(where + ": group " + to_string(e.group) + " already exists");
        }
        if (e.members.empty()) {
          throw ValidationError(where + ": names no member");
        }
        for (auto id : e.members) {
          claim(id, where);
        }
        groups[e.group] = { e.members.begin(), e.members.end() };
        break;
      }
    }
  }
}

bool
RunReport::invariants_hold() const
{
  for (const auto& o : sim->outcomes()) {
    if (!o.violations.empty()) {
      return false;
    }
  }
  return true;
}

bool
RunReport::properties_hold() const
{
  for (const auto& v : verdicts) {
    if (!v.pass()) {
      return false;
    }
  }
  return true;
}

RunReport
run_scenario(const Scenario& s, Mutation mutation)
{
  validate_scenario(s);
  RunReport r;
  r.scenario = s;
  r.mutation = mutation;
  r.sim = std::make_unique<Simulation>(s.seed, s.sizes, mutation);
  auto& sim = *r.sim;
  for (const auto& g : s.groups) {
    sim.add_group(g.id, g.members);
  }
  if (s.cascade_fanout) {
    sim.build_cascade(*s.cascade_fanout);
  }

  for (const auto& e : s.events) {
    std::optional<Protocol> proto;
    std::uint64_t n = 0;
    std::uint64_t k = 1;
    switch (e.kind) {
      case EventKind::Join:
        proto = Protocol::Join;
        n = sim.group(e.group).size();
        break;
      case EventKind::Leave:
        proto = Protocol::Leave;
        n = sim.group(e.group).size();
        break;
      case EventKind::Partition:
        proto = Protocol::Partition;
        n = sim.group(e.group).size();
        break;
      case EventKind::Merge:
        proto = Protocol::Merge;
        for (auto gid : e.groups) {
          n += sim.group(gid).size();
        }
        k = e.groups.size();
        break;
      case EventKind::Spawn:
        break;
    }
    const auto out = sim.apply(e);
    // The cost rows describe a flat group; cascade traffic has no row to match.
    if (proto && !s.cascade_fanout) {
      r.reconciliations.push_back(
        compare_ledger(sim.network().ledger_for_event(out.index), *proto, n, k, s.sizes));
      r.reconciled_events.push_back(out.index);
    }
  }
  return r;
}

void
run_checks(RunReport& r, std::span<const Property> props)
{
  if (props.empty()) {
    props = r.scenario.checks;
  }
  r.verdicts = check_properties(props, *r.sim);
}

} // namespace sgrs
