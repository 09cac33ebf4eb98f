#pragma once

#include "sgrs/simnet.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sgrs {

enum class AtomKind : std::uint8_t
{
  Nonce,
  Key,
  Random,
  Plaintext,
};

enum class Rule : std::uint8_t
{
  Seed,
  Derive, // kdf2 over two known values
  Combine, // xor over known nonces
  Open,   // opened a sealed box whose key is known
};

struct Provenance
{
  Rule rule = Rule::Seed;
  std::size_t index = 0; // kdf/xor record, or box position in Evidence
  std::size_t item = 0;  // payload position for Open
  AtomKind kind = AtomKind::Plaintext;
};

// Everything a passive party could observe, indexed by value.
class Evidence
{
public:
  explicit Evidence(const Network& net);

  struct Box
  {
    BoxRef ref;
    Digest key; // used only as a lookup index; the box is really opened
    const SealedBox* box = nullptr;
    std::string tag;
  };

  const std::vector<KdfRecord>& kdf() const { return _kdf; }
  const std::vector<XorRecord>& xors() const { return _xor; }
  const std::vector<Box>& boxes() const { return _boxes; }
  std::size_t public_box_count() const { return _public; }
  std::optional<std::size_t> private_box_position(std::size_t private_index) const;

private:
  friend class Closure;

  std::vector<KdfRecord> _kdf;
  std::vector<XorRecord> _xor;
  std::vector<Box> _boxes;
  std::size_t _public = 0;
  std::unordered_map<Digest, std::vector<std::size_t>, DigestHash> _kdf_by_input;
  std::unordered_map<Digest, std::vector<std::size_t>, DigestHash> _xor_by_input;
  std::unordered_map<Digest, std::vector<std::size_t>, DigestHash> _box_by_key;
};

struct KnowledgeSet
{
  std::unordered_map<Digest, Provenance, DigestHash> atoms;
  std::vector<std::size_t> private_boxes; // private box indices this party holds

  bool contains(const Digest& d) const { return atoms.count(d) != 0; }
  std::size_t size() const { return atoms.size(); }
  void add_seed(const Digest& d, AtomKind kind = AtomKind::Plaintext);
};

KnowledgeSet snapshot_knowledge(const MemberState& member);

struct ClosureBudgetExceeded : Error
{
  using Error::Error;
};

inline constexpr std::size_t default_atom_budget = 1'000'000;

KnowledgeSet close(const Evidence& ev,
                   const KnowledgeSet& seeds,
                   std::size_t budget = default_atom_budget);

// One rule application per line, from seeds to the target.
std::vector<std::string> witness_chain(const Evidence& ev,
                                       const KnowledgeSet& k,
                                       const Digest& target);

// Recomputes the chain with the primitives; true iff every step reproduces.
bool replay_witness(const Evidence& ev, const KnowledgeSet& k, const Digest& target);

} // namespace sgrs
