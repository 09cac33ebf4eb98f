#include "sgrs/adversary.hpp"

#include <deque>
#include <functional>
#include <set>

namespace sgrs {

Evidence::Evidence(const Network& net)
  : _kdf(net.kdf_records())
  , _xor(net.xor_records())
{
  const auto& msgs = net.transcript();
  for (std::size_t i = 0; i < msgs.size(); i++) {
    _boxes.push_back({ { false, i }, net.sealing_key({ false, i }), &msgs[i].box,
                       msgs[i].step_tag + "#" + std::to_string(i) });
  }
  _public = _boxes.size();
  const auto& priv = net.private_boxes();
  for (std::size_t i = 0; i < priv.size(); i++) {
    _boxes.push_back({ { true, i }, net.sealing_key({ true, i }), &priv[i].box,
                       priv[i].step_tag + "#p" + std::to_string(i) });
  }

  for (std::size_t i = 0; i < _kdf.size(); i++) {
    _kdf_by_input[_kdf[i].a].push_back(i);
    if (_kdf[i].b != _kdf[i].a) {
      _kdf_by_input[_kdf[i].b].push_back(i);
    }
  }
  for (std::size_t i = 0; i < _xor.size(); i++) {
    std::set<Digest> distinct(_xor[i].inputs.begin(), _xor[i].inputs.end());
    for (const auto& d : distinct) {
      _xor_by_input[d].push_back(i);
    }
  }
  for (std::size_t i = 0; i < _boxes.size(); i++) {
    _box_by_key[_boxes[i].key].push_back(i);
  }
}

std::optional<std::size_t>
Evidence::private_box_position(std::size_t private_index) const
{
  const auto pos = _public + private_index;
  if (pos >= _boxes.size()) {
    return std::nullopt;
  }
  return pos;
}

void
KnowledgeSet::add_seed(const Digest& d, AtomKind kind)
{
  atoms.emplace(d, Provenance{ Rule::Seed, 0, 0, kind });
}

KnowledgeSet
snapshot_knowledge(const MemberState& member)
{
  KnowledgeSet k;
  for (const auto& d : member.recall) {
    k.add_seed(d);
  }
  for (const auto& [origin, n] : member.state) {
    k.add_seed(n.value, AtomKind::Nonce);
  }
  k.add_seed(member.group_key, AtomKind::Key);
  k.private_boxes = member.private_boxes;
  return k;
}

namespace {

AtomKind
kind_of(ItemKind k)
{
  switch (k) {
    case ItemKind::Nonce:
      return AtomKind::Nonce;
    case ItemKind::Key:
      return AtomKind::Key;
    case ItemKind::Random:
      return AtomKind::Random;
    default:
      return AtomKind::Plaintext;
  }
}

} // namespace

class Closure
{
public:
  Closure(const Evidence& ev, const KnowledgeSet& seeds, std::size_t budget)
    : _ev(ev)
    , _budget(budget)
    , _k(seeds)
    , _kdf_missing(ev._kdf.size())
    , _xor_missing(ev._xor.size())
    , _box_visible(ev._boxes.size(), false)
    , _box_done(ev._boxes.size(), false)
  {
    for (std::size_t i = 0; i < ev._kdf.size(); i++) {
      _kdf_missing[i] = ev._kdf[i].a == ev._kdf[i].b ? 1 : 2;
    }
    for (std::size_t i = 0; i < ev._xor.size(); i++) {
      _xor_missing[i] =
        std::set<Digest>(ev._xor[i].inputs.begin(), ev._xor[i].inputs.end()).size();
    }
    for (std::size_t i = 0; i < ev._public; i++) {
      _box_visible[i] = true;
    }
    for (auto p : seeds.private_boxes) {
      if (const auto pos = ev.private_box_position(p)) {
        _box_visible[*pos] = true;
      }
    }
  }

  KnowledgeSet run()
  {
    for (const auto& [d, prov] : _k.atoms) {
      _queue.push_back(d);
    }
    while (!_queue.empty()) {
      const auto d = _queue.front();
      _queue.pop_front();
      visit(d);
    }
    return std::move(_k);
  }

private:
  void learn(const Digest& d, Provenance p)
  {
    if (_k.atoms.emplace(d, p).second) {
      if (_k.atoms.size() > _budget) {
        throw ClosureBudgetExceeded("knowledge closure exceeded its atom budget");
      }
      _queue.push_back(d);
    }
  }

  void visit(const Digest& d)
  {
    if (const auto it = _ev._kdf_by_input.find(d); it != _ev._kdf_by_input.end()) {
      for (auto i : it->second) {
        if (--_kdf_missing[i] == 0) {
          const auto kind = _ev._kdf[i].label == KdfLabel::NonceRehash ? AtomKind::Nonce
                                                                        : AtomKind::Key;
          learn(_ev._kdf[i].out, { Rule::Derive, i, 0, kind });
        }
      }
    }
    if (const auto it = _ev._xor_by_input.find(d); it != _ev._xor_by_input.end()) {
      for (auto i : it->second) {
        if (--_xor_missing[i] == 0) {
          learn(_ev._xor[i].out, { Rule::Combine, i, 0, AtomKind::Plaintext });
        }
      }
    }
    if (const auto it = _ev._box_by_key.find(d); it != _ev._box_by_key.end()) {
      for (auto i : it->second) {
        if (!_box_visible[i] || _box_done[i]) {
          continue;
        }
        _box_done[i] = true;
        const auto pt = open(d, *_ev._boxes[i].box);
        if (!pt) {
          continue;
        }
        const auto payload = decode_payload(*pt);
        if (!payload) {
          continue;
        }
        for (std::size_t j = 0; j < payload->size(); j++) {
          const auto& item = (*payload)[j];
          if (item.carries_value()) {
            learn(item.value, { Rule::Open, i, j, kind_of(item.kind) });
          }
        }
      }
    }
  }

  const Evidence& _ev;
  std::size_t _budget;
  KnowledgeSet _k;
  std::vector<std::size_t> _kdf_missing;
  std::vector<std::size_t> _xor_missing;
  std::vector<bool> _box_visible;
  std::vector<bool> _box_done;
  std::deque<Digest> _queue;
};

KnowledgeSet
close(const Evidence& ev, const KnowledgeSet& seeds, std::size_t budget)
{
  return Closure(ev, seeds, budget).run();
}

namespace {

// Depth-first over provenance; emits parents before children.
void
walk(const Evidence& ev,
     const KnowledgeSet& k,
     const Digest& d,
     std::set<Digest>& seen,
     const std::function<void(const Digest&, const Provenance&)>& emit)
{
  if (!seen.insert(d).second) {
    return;
  }
  const auto& prov = k.atoms.at(d);
  switch (prov.rule) {
    case Rule::Seed:
      break;
    case Rule::Derive: {
      const auto& r = ev.kdf()[prov.index];
      walk(ev, k, r.a, seen, emit);
      walk(ev, k, r.b, seen, emit);
      break;
    }
    case Rule::Combine:
      for (const auto& in : ev.xors()[prov.index].inputs) {
        walk(ev, k, in, seen, emit);
      }
      break;
    case Rule::Open:
      walk(ev, k, ev.boxes()[prov.index].key, seen, emit);
      break;
  }
  emit(d, prov);
}

} // namespace

std::vector<std::string>
witness_chain(const Evidence& ev, const KnowledgeSet& k, const Digest& target)
{
  std::vector<std::string> out;
  if (!k.contains(target)) {
    return out;
  }
  std::set<Digest> seen;
  walk(ev, k, target, seen, [&](const Digest& d, const Provenance& p) {
    switch (p.rule) {
      case Rule::Seed:
        out.push_back("know " + d.short_hex());
        break;
      case Rule::Derive: {
        const auto& r = ev.kdf()[p.index];
        out.push_back("kdf2(" + std::string(label_name(r.label)) + ", " + r.a.short_hex() +
                      ", " + r.b.short_hex() + ") = " + d.short_hex());
        break;
      }
      case Rule::Combine: {
        std::string line = "xor(";
        const auto& ins = ev.xors()[p.index].inputs;
        for (std::size_t i = 0; i < ins.size(); i++) {
          line += (i ? ", " : "") + ins[i].short_hex();
        }
        out.push_back(line + ") = " + d.short_hex());
        break;
      }
      case Rule::Open: {
        const auto& b = ev.boxes()[p.index];
        out.push_back("open " + b.tag + " with " + b.key.short_hex() + " -> item " +
                      std::to_string(p.item) + " = " + d.short_hex());
        break;
      }
    }
  });
  return out;
}

bool
replay_witness(const Evidence& ev, const KnowledgeSet& k, const Digest& target)
{
  if (!k.contains(target)) {
    return false;
  }
  bool ok = true;
  std::set<Digest> seen;
  walk(ev, k, target, seen, [&](const Digest& d, const Provenance& p) {
    switch (p.rule) {
      case Rule::Seed:
        break;
      case Rule::Derive: {
        const auto& r = ev.kdf()[p.index];
        ok = ok && kdf2(r.label, r.a, r.b) == d;
        break;
      }
      case Rule::Combine: {
        Digest acc;
        for (const auto& in : ev.xors()[p.index].inputs) {
          for (std::size_t i = 0; i < digest_size; i++) {
            acc.bytes[i] ^= in.bytes[i];
          }
        }
        ok = ok && acc == d;
        break;
      }
      case Rule::Open: {
        const auto& b = ev.boxes()[p.index];
        const auto pt = open(b.key, *b.box);
        const auto payload = pt ? decode_payload(*pt) : std::nullopt;
        ok = ok && payload && p.item < payload->size() && (*payload)[p.item].value == d;
        break;
      }
    }
  });
  return ok;
}

} // namespace sgrs
