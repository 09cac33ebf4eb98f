#include "sgrs/properties.hpp"

#include <map>

namespace sgrs {

namespace {

constexpr std::array<std::pair<Property, std::string_view>, 5> property_table{ {
  { Property::GroupKeySecrecy, "group-key-secrecy" },
  { Property::BackwardSecrecy, "backward-secrecy" },
  { Property::ForwardSecrecy, "forward-secrecy" },
  { Property::ForwardSecrecyCollusion, "forward-secrecy-collusion" },
  { Property::KeyIndependence, "key-independence" },
} };

struct Target
{
  Digest value;
  std::string label;
};

std::string
epoch_label(const Epoch& e)
{
  std::string out = e.level == 1 ? to_string(e.group) + " key"
                                 : "level-" + std::to_string(e.level) + " node " +
                                     std::to_string(e.group.value()) + " key";
  return out + (e.event ? " @event " + std::to_string(*e.event) : " @setup");
}

// Runs one attacker and records every target it reaches.
void
probe(const Evidence& ev,
      const KnowledgeSet& seeds,
      std::string attacker,
      const std::vector<Target>& targets,
      Verdict& v)
{
  v.checks++;
  const auto k = close(ev, seeds);
  for (const auto& t : targets) {
    if (!k.contains(t.value)) {
      continue;
    }
    v.leaks++;
    if (v.findings.size() < max_findings) {
      v.findings.push_back({ attacker, t.label, witness_chain(ev, k, t.value),
                             replay_witness(ev, k, t.value) });
    }
  }
}

KnowledgeSet
pooled(const std::vector<MemberState>& members)
{
  KnowledgeSet k;
  for (const auto& m : members) {
    auto one = snapshot_knowledge(m);
    k.atoms.merge(one.atoms);
    k.private_boxes.insert(k.private_boxes.end(), one.private_boxes.begin(),
                           one.private_boxes.end());
  }
  return k;
}

std::string
names(const std::vector<MemberId>& ids)
{
  std::string out;
  for (auto id : ids) {
    out += (out.empty() ? "" : "+") + to_string(id);
  }
  return out;
}

std::vector<Target>
after(const Simulation& sim, std::size_t event)
{
  std::vector<Target> out;
  for (const auto& e : sim.epochs()) {
    if (e.event && *e.event >= event) {
      out.push_back({ e.key, epoch_label(e) });
    }
  }
  const auto& msgs = sim.network().transcript();
  for (std::size_t i = 0; i < msgs.size(); i++) {
    if (msgs[i].event >= event) {
      out.push_back({ sim.network().sealing_key({ false, i }),
                      "sealing key of " + msgs[i].step_tag + " @event " +
                        std::to_string(msgs[i].event) });
    }
  }
  return out;
}

void
forward(const Simulation& sim, const Evidence& ev, bool collusion, Verdict& v)
{
  for (const auto& d : sim.departures()) {
    const auto targets = after(sim, d.event);
    if (collusion) {
      if (!d.simultaneous || d.members.size() < 2) {
        continue;
      }
      std::vector<MemberId> ids;
      for (const auto& m : d.members) {
        ids.push_back(m.id);
      }
      probe(ev, pooled(d.members), "departed " + names(ids), targets, v);
      continue;
    }
    for (const auto& m : d.members) {
      probe(ev, snapshot_knowledge(m), "departed " + to_string(m.id), targets, v);
    }
  }
}

void
backward(const Simulation& sim, const Evidence& ev, Verdict& v)
{
  for (const auto& a : sim.admissions()) {
    std::vector<Target> targets;
    for (const auto& k : a.forbidden) {
      targets.push_back({ k, "pre-" + a.kind + " key of " + to_string(a.group) + " " +
                               k.short_hex() });
    }
    if (targets.empty()) {
      continue;
    }
    std::vector<MemberState> states;
    for (auto id : a.members) {
      if (auto m = sim.find_member(id)) {
        states.push_back(std::move(*m));
      }
    }
    probe(ev, pooled(states), a.kind + " " + names(a.members), targets, v);
  }
}

void
independence(const Simulation& sim, const Evidence& ev, Verdict& v)
{
  std::map<std::size_t, std::vector<const Epoch*>> levels;
  for (const auto& e : sim.epochs()) {
    levels[e.level].push_back(&e);
  }
  for (const auto& [level, epochs] : levels) {
    for (const auto* target : epochs) {
      KnowledgeSet seeds;
      for (const auto* other : epochs) {
        if (other != target) {
          seeds.add_seed(other->key, AtomKind::Key);
        }
      }
      probe(ev, seeds, "all other level-" + std::to_string(level) + " keys",
            { { target->key, epoch_label(*target) } }, v);
    }
  }
}

} // namespace

std::string_view
property_name(Property p)
{
  for (const auto& [k, name] : property_table) {
    if (k == p) {
      return name;
    }
  }
  return "?";
}

Property
parse_property(std::string_view name)
{
  for (const auto& [k, n] : property_table) {
    if (n == name) {
      return k;
    }
  }
  throw ConfigError("unknown property: " + std::string(name));
}

Verdict
check_property(Property p, const Simulation& sim, const Evidence& ev)
{
  Verdict v;
  v.property = p;
  switch (p) {
    case Property::GroupKeySecrecy: {
      std::vector<Target> targets;
      for (const auto& e : sim.epochs()) {
        targets.push_back({ e.key, epoch_label(e) });
      }
      probe(ev, {}, "outsider", targets, v);
      break;
    }
    case Property::BackwardSecrecy:
      backward(sim, ev, v);
      break;
    case Property::ForwardSecrecy:
      forward(sim, ev, false, v);
      break;
    case Property::ForwardSecrecyCollusion:
      forward(sim, ev, true, v);
      break;
    case Property::KeyIndependence:
      independence(sim, ev, v);
      break;
  }
  return v;
}

std::vector<Verdict>
check_properties(std::span<const Property> props, const Simulation& sim)
{
  const Evidence ev(sim.network());
  std::vector<Verdict> out;
  for (auto p : props) {
    out.push_back(check_property(p, sim, ev));
  }
  return out;
}

} // namespace sgrs
