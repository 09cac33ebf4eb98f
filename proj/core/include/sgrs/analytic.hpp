#pragma once

#include "sgrs/simnet.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgrs {

enum class Scheme : std::uint8_t
{
  Kim,
  Lv,
  Chen,
  Mehdizadeh,
  Zhong,
  Sgrs,
};

enum class Protocol : std::uint8_t
{
  Join,
  Leave,
  Merge,
  Partition,
};

std::string_view scheme_name(Scheme s);
std::string_view protocol_name(Protocol p);

struct MessageCount
{
  double uc = 0;
  double bc = 0;
  double mc = 0;

  double total() const { return uc + bc + mc; }
};

// One row of the published cost comparison. Text fields are kept exactly as
// printed; evaluators implement the byte and message columns.
struct CostFormula
{
  Scheme scheme;
  Protocol protocol;
  std::string_view comp;
  std::string_view comm;
  std::string_view bytes;
  bool as_printed = false; // a garbled cell, kept verbatim and never gated on
  std::string_view note;
  double (*eval_bytes)(double n, double k, double ck, double in) = nullptr;
  MessageCount (*eval_messages)(double n, double k) = nullptr;

  std::string citation() const;
};

const std::vector<CostFormula>& cost_table();
const CostFormula* find_formula(Scheme s, Protocol p);
const CostFormula& formula(Scheme s, Protocol p); // throws DomainError when absent

// n = group size, k = number of groups. Throws DomainError for n < 2 or k < 1.
double eval_bytes(const CostFormula& f, std::uint64_t n, std::uint64_t k, const SizeModel& sizes);
MessageCount eval_messages(const CostFormula& f, std::uint64_t n, std::uint64_t k);

// Expected hash operations for our own rows; nullopt where the cell is garbled.
std::optional<double> sgrs_hash_ops(Protocol p, std::uint64_t n, std::uint64_t k);

std::string render_cost_table();

// Subgroup count used for the two schemes whose rows depend on it.
inline constexpr std::uint64_t figure_subgroups = 10;
inline constexpr std::uint64_t figure_group_size = 100;
inline constexpr std::uint64_t figure_groups = 15;

struct Series
{
  Scheme scheme;
  std::vector<double> values;
};

struct FigureData
{
  int figure = 0;
  std::string x_label;
  std::vector<std::uint64_t> x;
  std::vector<Series> series;
  std::vector<std::string> notes;

  const Series* find(Scheme s) const;
};

FigureData emit_figure(int figure, const SizeModel& sizes); // throws DomainError
std::string figure_csv(const FigureData& f);
std::string figure_metadata(const FigureData& f, const SizeModel& sizes);

struct Reconciliation
{
  Protocol protocol = Protocol::Join;
  std::uint64_t n = 0;
  std::uint64_t k = 1;
  Counters measured;
  MessageCount expected_messages;
  double expected_bytes = 0;
  double byte_tolerance = 0;
  double byte_delta = 0;
  double message_delta = 0;
  std::optional<double> expected_hash;
  bool pass = false;
  std::vector<std::string> attribution; // one line per step that carries a delta
};

// The step tags each of our rows describes; other steps are counted as unmodelled.
std::vector<std::string_view> modelled_steps(Protocol p);

Reconciliation compare_ledger(const EventLedger& ledger,
                              Protocol p,
                              std::uint64_t n,
                              std::uint64_t k,
                              const SizeModel& sizes);

std::string render_reconciliation(const Reconciliation& r);

} // namespace sgrs
