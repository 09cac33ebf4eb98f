#include "sgrs/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace sgrs {

namespace {

double
lg(double x)
{
  return std::log2(x);
}

MessageCount
msgs(double uc, double bc, double mc = 0)
{
  return { uc, bc, mc };
}

// Cells are transcribed character for character from the published table.
const std::vector<CostFormula> table{
  { Scheme::Kim, Protocol::Join, "(3 \\log_2 N + 9)Ex + (4 + 2N)E", "2BC",
    "N CK + N CK (2N - 1)", false, "",
    [](double n, double, double ck, double) { return n * ck + n * ck * (2 * n - 1); },
    [](double, double) { return msgs(0, 2); } },
  { Scheme::Kim, Protocol::Leave, "(3 \\log_2 N + 9)Ex + (2 + 2N)E", "1BC",
    "N CK \\log_2 N", false, "",
    [](double n, double, double ck, double) { return n * ck * lg(n); },
    [](double, double) { return msgs(0, 1); } },
  { Scheme::Kim, Protocol::Merge, "(3 \\log_2 N + 9)Ex + (2k(1 + N) + 1 + N)E", "(1 + 2k)BC",
    "\\frac{CK}{k} (kN - N)(2N - k) + N(2n - 1) CK", false,
    "n is not defined by the table; evaluated as the per-group size N/k",
    [](double n, double k, double ck, double) {
      const auto per = n / k;
      return ck / k * (k * n - n) * (2 * n - k) + n * (2 * per - 1) * ck;
    },
    [](double, double k) { return msgs(0, 1 + 2 * k); } },
  { Scheme::Kim, Protocol::Partition, "(3 \\log_2 N + 9)Ex + miN(2k, N/2)E",
    "min(2k, N/2)BC", "k N CK \\log_2 N", true,
    "computation cell misprints min as miN",
    [](double n, double k, double ck, double) { return k * n * ck * lg(n); },
    [](double n, double k) { return msgs(0, std::min(2 * k, n / 2)); } },

  { Scheme::Lv, Protocol::Join, "(2N^2 + N)Mu + (5 + N)E", "2UC + 1BC",
    "(2N + 1)Int + N CK", false, "",
    [](double n, double, double ck, double in) { return (2 * n + 1) * in + n * ck; },
    [](double, double) { return msgs(2, 1); } },
  { Scheme::Lv, Protocol::Leave, "(2N^2 + N)Mu + (1 + N)E", "1BC", "N Int", false, "",
    [](double n, double, double, double in) { return n * in; },
    [](double, double) { return msgs(0, 1); } },
  { Scheme::Lv, Protocol::Merge, "(2N^3 + N2 + N)Mu + (5 + N)E", "kBC + 2kUC",
    "(N^2 - \\frac{N^2}{K})(CK - Int)", true,
    "computation cell prints N2 where a power is likely meant",
    [](double n, double k, double ck, double in) { return (n * n - n * n / k) * (ck - in); },
    [](double, double k) { return msgs(2 * k, k); } },
  { Scheme::Lv, Protocol::Partition, "(2 Gi 2 + Gi)Mu + (5 + N)E", "kBC",
    "(N^2 - \\frac{N^2}{K})Int", true,
    "computation cell lost its group-size exponents",
    [](double n, double k, double, double in) { return (n * n - n * n / k) * in; },
    [](double, double k) { return msgs(0, k); } },

  { Scheme::Chen, Protocol::Join, "(4 \\log_2 N)Ex + (5 + 2N \\log_2 N)E",
    "(2 \\log_2 N)MC + 2BC", "CK(2 \\log_2 N + 2) + N CK(\\log_2 N + 1)", false, "",
    [](double n, double, double ck, double) {
      return ck * (2 * lg(n) + 2) + n * ck * (lg(n) + 1);
    },
    [](double n, double) { return msgs(0, 2, 2 * lg(n)); } },
  { Scheme::Chen, Protocol::Leave, "(2 \\log_2 N)Ex + 2h(2 + 2N \\log_2 N)E",
    "(2 \\log_2 N)MC", "CK2 \\log_2 N + N CK(\\log_2 N + 1)", true,
    "computation cell carries an undefined factor h",
    [](double n, double, double ck, double) { return ck * 2 * lg(n) + n * ck * (lg(n) + 1); },
    [](double n, double) { return msgs(0, 0, 2 * lg(n)); } },

  { Scheme::Mehdizadeh, Protocol::Join, "(6N^2 + 3N)Mu + (8 + 4N)E", "3UC + 2MC",
    "2int + CK(K + \\frac{N}{K} + 1 + \\log_2 K)", false, "K is the subgroup count",
    [](double n, double k, double ck, double in) {
      return 2 * in + ck * (k + n / k + 1 + lg(k));
    },
    [](double, double) { return msgs(3, 0, 2); } },
  { Scheme::Mehdizadeh, Protocol::Leave, "(6N^2 + 3N)Mu + (6 + 4N)E", "4UC + 2MC",
    "4int + CK(K + \\frac{N}{K} - 3 + \\log_2 K)", false, "K is the subgroup count",
    [](double n, double k, double ck, double in) {
      return 4 * in + ck * (k + n / k - 3 + lg(k));
    },
    [](double, double) { return msgs(4, 0, 2); } },

  { Scheme::Zhong, Protocol::Join, "(8 + \\frac{N}{K} + 2^{K+1} + \\log_2 K)E + 2Ex",
    "1UC + 3BC", "5NCK + 1Int", false, "single-service case",
    [](double n, double, double ck, double in) { return 5 * n * ck + in; },
    [](double, double) { return msgs(1, 3); } },
  { Scheme::Zhong, Protocol::Leave, "(9 + \\frac{N}{K} + 2^{K+1} + \\log_2 K)E + Ex", "3BC",
    "5NCK", false, "single-service case",
    [](double n, double, double ck, double) { return 5 * n * ck; },
    [](double, double) { return msgs(0, 3); } },

  { Scheme::Sgrs, Protocol::Join, "(N - 1)H + (N + 2)E", "2UC + 1BC", "N Int + CK", false, "",
    [](double n, double, double ck, double in) { return n * in + ck; },
    [](double, double) { return msgs(2, 1); } },
  { Scheme::Sgrs, Protocol::Leave, "2NH + 2NE", "2UC + 1BC", "(N - 1)Int + CK", false,
    "the message listing has one unicast and one broadcast",
    [](double n, double, double ck, double in) { return (n - 1) * in + ck; },
    [](double, double) { return msgs(2, 1); } },
  { Scheme::Sgrs, Protocol::Merge,
    "(2K - 1) \\left[\\left(7 + \\frac{N}{K}\\right) + \\left(\\frac{N}{K} - 1\\right)H \\right]",
    "(3K - 3)UC + (3K - 3)BC",
    "4KCK + \\left(3 + \\frac{N}{K}\\right)\\frac{N}{K} Int", true,
    "computation cell has a first addend without a unit",
    [](double n, double k, double ck, double in) {
      return 4 * k * ck + (3 + n / k) * (n / k) * in;
    },
    [](double, double k) { return msgs(3 * k - 3, 3 * k - 3); } },
  { Scheme::Sgrs, Protocol::Partition, "(N + 2K)E + (K + N - 2)H", "KBC + KUC",
    "NInt + K CK", false, "",
    [](double n, double k, double ck, double in) { return n * in + k * ck; },
    [](double, double k) { return msgs(k, k); } },
};

void
check_range(std::uint64_t n, std::uint64_t k)
{
  if (n < 2 || k < 1) {
    throw DomainError("cost formulas need N >= 2 and K >= 1");
  }
}

std::string
number(double v)
{
  char buf[64];
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", v);
  }
  return buf;
}

std::string
signed_number(double v)
{
  return (v > 0 ? "+" : "") + number(v);
}

} // namespace

std::string_view
scheme_name(Scheme s)
{
  switch (s) {
    case Scheme::Kim:
      return "Kim";
    case Scheme::Lv:
      return "Lv";
    case Scheme::Chen:
      return "Chen";
    case Scheme::Mehdizadeh:
      return "Mehdizadeh";
    case Scheme::Zhong:
      return "Zhong";
    case Scheme::Sgrs:
      return "SGRS";
  }
  return "?";
}

std::string_view
protocol_name(Protocol p)
{
  switch (p) {
    case Protocol::Join:
      return "Join";
    case Protocol::Leave:
      return "Leave";
    case Protocol::Merge:
      return "Merge";
    case Protocol::Partition:
      return "Partition";
  }
  return "?";
}

std::string
CostFormula::citation() const
{
  return "cost table, row " + std::string(scheme_name(scheme)) + "/" +
         std::string(protocol_name(protocol));
}

const std::vector<CostFormula>&
cost_table()
{
  return table;
}

const CostFormula*
find_formula(Scheme s, Protocol p)
{
  for (const auto& f : table) {
    if (f.scheme == s && f.protocol == p) {
      return &f;
    }
  }
  return nullptr;
}

const CostFormula&
formula(Scheme s, Protocol p)
{
  if (const auto* f = find_formula(s, p)) {
    return *f;
  }
  throw DomainError("no cost row for " + std::string(scheme_name(s)) + " " +
                    std::string(protocol_name(p)));
}

double
eval_bytes(const CostFormula& f, std::uint64_t n, std::uint64_t k, const SizeModel& sizes)
{
  check_range(n, k);
  return f.eval_bytes(static_cast<double>(n), static_cast<double>(k), sizes.key_bytes,
                      sizes.int_bytes);
}

MessageCount
eval_messages(const CostFormula& f, std::uint64_t n, std::uint64_t k)
{
  check_range(n, k);
  return f.eval_messages(static_cast<double>(n), static_cast<double>(k));
}

std::optional<double>
sgrs_hash_ops(Protocol p, std::uint64_t n, std::uint64_t k)
{
  const auto nn = static_cast<double>(n);
  const auto kk = static_cast<double>(k);
  switch (p) {
    case Protocol::Join:
      return nn; // the cell's N counts the joiner, n does not
    case Protocol::Leave:
      return 2 * nn;
    case Protocol::Partition:
      return kk + nn - 2;
    case Protocol::Merge:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string
render_cost_table()
{
  std::ostringstream out;
  out << "scheme\tprotocol\tcomputation\tmessages\tbytes\tflag\n";
  for (const auto& f : table) {
    out << scheme_name(f.scheme) << '\t' << protocol_name(f.protocol) << '\t' << f.comp << '\t'
        << f.comm << '\t' << f.bytes << '\t' << (f.as_printed ? "as_printed" : "-") << '\n';
  }
  return out.str();
}

const Series*
FigureData::find(Scheme s) const
{
  for (const auto& x : series) {
    if (x.scheme == s) {
      return &x;
    }
  }
  return nullptr;
}

FigureData
emit_figure(int figure, const SizeModel& sizes)
{
  constexpr std::array<Scheme, 6> all{ Scheme::Kim,        Scheme::Lv,    Scheme::Chen,
                                       Scheme::Mehdizadeh, Scheme::Zhong, Scheme::Sgrs };
  FigureData out;
  out.figure = figure;

  if (figure == 10 || figure == 11) {
    const auto proto = figure == 10 ? Protocol::Join : Protocol::Leave;
    out.x_label = figure == 10 ? "joins" : "leaves";
    for (std::uint64_t x = 5; x <= 25; x++) {
      out.x.push_back(x);
    }
    for (auto s : all) {
      const auto& f = formula(s, proto);
      Series series{ s, {} };
      for (auto events : out.x) {
        double total = 0;
        for (std::uint64_t i = 0; i < events; i++) {
          const auto n = figure == 10 ? figure_group_size + i : figure_group_size - i;
          total += eval_bytes(f, n, figure_subgroups, sizes);
        }
        series.values.push_back(total);
      }
      out.series.push_back(std::move(series));
    }
    out.notes.push_back("group size before each event: " + std::string(figure == 10 ? "100+i" : "100-i"));
    out.notes.push_back("subgroup count K = " + std::to_string(figure_subgroups) +
                        " for rows that depend on it");
    return out;
  }

  if (figure == 12 || figure == 13) {
    const auto proto = figure == 12 ? Protocol::Merge : Protocol::Partition;
    out.x_label = "group_size";
    for (std::uint64_t x = 7; x <= 34; x++) {
      out.x.push_back(x);
    }
    for (auto s : all) {
      const auto* f = find_formula(s, proto);
      if (f == nullptr) {
        out.notes.push_back(std::string(scheme_name(s)) + ": no " +
                            std::string(protocol_name(proto)) + " row, series omitted");
        continue;
      }
      Series series{ s, {} };
      for (auto size : out.x) {
        series.values.push_back(eval_bytes(*f, size * figure_groups, figure_groups, sizes));
      }
      out.series.push_back(std::move(series));
    }
    out.notes.push_back("K = " + std::to_string(figure_groups) + " equal groups, N = K * group_size");
    if (figure == 12) {
      out.notes.push_back("merge sweep range is inferred from the partition caption");
    }
    return out;
  }

  throw DomainError("unsupported figure " + std::to_string(figure));
}

std::string
figure_csv(const FigureData& f)
{
  std::ostringstream out;
  out << f.x_label;
  for (const auto& s : f.series) {
    out << ',' << scheme_name(s.scheme);
  }
  out << '\n';
  for (std::size_t i = 0; i < f.x.size(); i++) {
    out << f.x[i];
    for (const auto& s : f.series) {
      out << ',' << number(s.values[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string
figure_metadata(const FigureData& f, const SizeModel& sizes)
{
  std::ostringstream out;
  out << "figure=" << f.figure << '\n';
  out << "int_bytes=" << sizes.int_bytes << '\n';
  out << "key_bytes=" << sizes.key_bytes << '\n';
  for (const auto& s : f.series) {
    for (const auto& row : table) {
      if (row.scheme == s.scheme &&
          ((f.figure == 10 && row.protocol == Protocol::Join) ||
           (f.figure == 11 && row.protocol == Protocol::Leave) ||
           (f.figure == 12 && row.protocol == Protocol::Merge) ||
           (f.figure == 13 && row.protocol == Protocol::Partition))) {
        out << "formula." << scheme_name(row.scheme) << '=' << row.bytes
            << (row.as_printed ? " [as_printed]" : "") << '\n';
        if (!row.note.empty()) {
          out << "note." << scheme_name(row.scheme) << '=' << row.note << '\n';
        }
      }
    }
  }
  for (const auto& n : f.notes) {
    out << "note=" << n << '\n';
  }
  return out.str();
}

std::vector<std::string_view>
modelled_steps(Protocol p)
{
  switch (p) {
    case Protocol::Join:
      return { "join.welcome" };
    case Protocol::Leave:
      return { "leave.deliver" };
    case Protocol::Partition:
      return { "partition.notice", "partition.deliver" };
    case Protocol::Merge:
      return { "merge.request", "merge.update", "merge.share", "merge.link", "merge.adopt",
               "merge.bridge" };
  }
  return {};
}

Reconciliation
compare_ledger(const EventLedger& ledger,
               Protocol p,
               std::uint64_t n,
               std::uint64_t k,
               const SizeModel& sizes)
{
  const auto& f = formula(Scheme::Sgrs, p);
  Reconciliation r;
  r.protocol = p;
  r.n = n;
  r.k = k;
  r.measured = ledger.totals;
  r.expected_messages = eval_messages(f, n, k);
  r.expected_bytes = eval_bytes(f, n, k, sizes);
  r.byte_tolerance = sizes.key_bytes + static_cast<double>(n) * sizes.int_bytes;
  r.byte_delta = static_cast<double>(r.measured.bytes) - r.expected_bytes;
  r.message_delta =
    static_cast<double>(r.measured.messages()) - r.expected_messages.total();
  r.expected_hash = sgrs_hash_ops(p, n, k);
  r.pass = std::fabs(r.message_delta) <= 1 && std::fabs(r.byte_delta) <= r.byte_tolerance;

  const auto modelled = modelled_steps(p);
  std::uint64_t modelled_bytes = 0;
  for (const auto& [step, c] : ledger.by_step) {
    const bool covered =
      std::find(modelled.begin(), modelled.end(), step) != modelled.end();
    if (covered) {
      modelled_bytes += c.bytes;
    }
    if (c.messages() == 0 && c.bytes == 0 && c.hash_ops == 0) {
      continue;
    }
    std::string line = step + (covered ? " (modelled)" : " (unmodelled)") + ":";
    if (c.messages() != 0) {
      line += " " + std::to_string(c.uc) + "UC " + std::to_string(c.bc) + "BC " +
              std::to_string(c.bytes) + " bytes";
    }
    if (c.hash_ops != 0) {
      line += " " + std::to_string(c.hash_ops) + "H";
    }
    r.attribution.push_back(line);
  }
  if (r.byte_delta != 0) {
    r.attribution.push_back(
      "byte delta " + signed_number(r.byte_delta) + ": modelled steps " +
      signed_number(static_cast<double>(modelled_bytes) - r.expected_bytes) +
      ", unmodelled steps " +
      signed_number(static_cast<double>(r.measured.bytes - modelled_bytes)));
  }
  if (r.message_delta != 0) {
    r.attribution.push_back("message delta " + signed_number(r.message_delta) + " (UC " +
                            signed_number(static_cast<double>(r.measured.uc) -
                                          r.expected_messages.uc) +
                            ", BC " +
                            signed_number(static_cast<double>(r.measured.bc) -
                                          r.expected_messages.bc) +
                            ")");
  }
  if (r.expected_hash && static_cast<double>(r.measured.hash_ops) != *r.expected_hash) {
    r.attribution.push_back("hash delta " +
                            signed_number(static_cast<double>(r.measured.hash_ops) -
                                          *r.expected_hash) +
                            " (informational)");
  }
  return r;
}

std::string
render_reconciliation(const Reconciliation& r)
{
  std::ostringstream out;
  out << protocol_name(r.protocol) << " N=" << r.n << " K=" << r.k << ": measured "
      << r.measured.uc << "UC+" << r.measured.bc << "BC " << r.measured.bytes
      << " bytes, model " << number(r.expected_messages.uc) << "UC+"
      << number(r.expected_messages.bc) << "BC " << number(r.expected_bytes)
      << " bytes (tolerance " << number(r.byte_tolerance) << ") -> "
      << (r.pass ? "PASS" : "FAIL") << '\n';
  out << "  hash ops " << r.measured.hash_ops << " (model "
      << (r.expected_hash ? number(*r.expected_hash) : std::string("n/a")) << "), multicast-key "
      << r.measured.mk_hash_ops << ", crypt " << r.measured.crypt_ops << ", auth "
      << r.measured.auth_ops << '\n';
  for (const auto& line : r.attribution) {
    out << "  " << line << '\n';
  }
  return out.str();
}

} // namespace sgrs
