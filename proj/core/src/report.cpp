#include "sgrs/scenario.hpp"

#include <sstream>

namespace sgrs {

namespace {

std::string
nonce_name(const Nonce& n)
{
  return "n" + std::to_string(n.origin.value()) + std::string(n.version, '\'');
}

std::string
counters_line(const Counters& c)
{
  std::ostringstream out;
  out << c.uc << "UC " << c.bc << "BC " << c.bytes << "B (physical " << c.physical_bytes
      << "B) H=" << c.hash_ops << " MK=" << c.mk_hash_ops << " E=" << c.crypt_ops
      << " auth=" << c.auth_ops;
  return out.str();
}

void
write_group(std::ostream& out, const GroupSnapshot& g)
{
  out << to_string(g.id) << " size " << g.size() << " key " << g.group_key.short_hex()
      << " ring";
  for (auto id : g.ring.order()) {
    out << ' ' << to_string(id);
  }
  out << '\n';
  for (auto id : g.ring.order()) {
    const auto& m = g.member(id);
    out << "  S(" << to_string(id) << ") =";
    for (const auto& [origin, n] : m.state) {
      out << ' ' << nonce_name(n) << ':' << n.value.short_hex();
    }
    out << '\n';
  }
}

} // namespace

std::string
render_report(const RunReport& r)
{
  const auto& sim = *r.sim;
  const auto& net = sim.network();
  std::ostringstream out;
  out << "sgrs report\n";
  out << "version " << SGRS_VERSION << '\n';
  out << "seed " << r.scenario.seed << '\n';
  out << "hash " << hash_name << ", cipher " << cipher_name << '\n';
  out << "sizes int=" << r.scenario.sizes.int_bytes << " key=" << r.scenario.sizes.key_bytes
      << '\n';
  out << "mutation " << mutation_name(r.mutation) << '\n';

  out << "\n[events]\n";
  for (const auto& o : sim.outcomes()) {
    const auto& ledger = net.ledger_for_event(o.index);
    out << "#" << o.index << ' ' << o.label << '\n';
    out << "  total " << counters_line(ledger.totals) << '\n';
    for (const auto& [step, c] : ledger.by_step) {
      out << "  step " << step << ": " << counters_line(c) << '\n';
    }
    for (const auto& n : o.notes) {
      out << "  note " << n << '\n';
    }
    for (const auto& v : o.violations) {
      out << "  VIOLATION " << to_string(v.member) << ": " << v.what << '\n';
    }
  }

  out << "\n[reconciliation]\n";
  for (std::size_t i = 0; i < r.reconciliations.size(); i++) {
    out << "#" << r.reconciled_events[i] << ' ' << render_reconciliation(r.reconciliations[i]);
  }

  out << "\n[totals]\n";
  out << counters_line(net.totals()) << '\n';
  out << "recounted bytes " << recount_bytes(net) << '\n';

  out << "\n[final]\n";
  for (const auto& [gid, g] : sim.groups()) {
    write_group(out, g);
  }
  if (const auto& c = sim.cascade()) {
    out << "cascade depth " << c->depth() << " top key " << c->top_key(sim.groups()).short_hex()
        << '\n';
    for (const auto& v : check_cascade(*c, sim.groups())) {
      out << "  VIOLATION " << to_string(v.member) << ": " << v.what << '\n';
    }
  }

  out << "\n[invariants]\n" << (r.invariants_hold() ? "hold" : "VIOLATED") << '\n';

  if (!r.verdicts.empty()) {
    out << "\n[properties]\n" << render_verdicts(r);
  }
  return out.str();
}

std::string
render_verdicts(const RunReport& r)
{
  std::ostringstream out;
  for (const auto& v : r.verdicts) {
    out << property_name(v.property) << ": " << (v.pass() ? "PASS" : "FAIL") << " ("
        << v.checks << " attackers, " << v.leaks << " leaks)\n";
    for (const auto& f : v.findings) {
      out << "  " << f.attacker << " derives " << f.target
          << (f.replayed ? " [witness replayed]" : " [witness NOT replayed]") << '\n';
      for (const auto& line : f.witness) {
        out << "    " << line << '\n';
      }
    }
  }
  return out.str();
}

std::string
render_transcript(const RunReport& r)
{
  std::ostringstream out;
  r.sim->network().write_transcript(out);
  return out.str();
}

} // namespace sgrs
