// Command-line front end: runs scenarios, property suites, figure data and the cost table.
#include "sgrs/churn.hpp"
#include "sgrs/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace sgrs;

namespace {

enum Exit : int
{
  ok = 0,
  parse_failure = 2,
  validation_failure = 3,
  refusal = 4,
  property_failure = 5,
  usage = 64,
};

SizeModel
parse_sizes(const std::string& text, SizeModel sizes)
{
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--sizes expects name=value pairs, got '" + part + "'");
    }
    const auto name = part.substr(0, eq);
    std::uint32_t value = 0;
    try {
      value = static_cast<std::uint32_t>(std::stoul(part.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ConfigError("--sizes: bad value in '" + part + "'");
    }
    if (name == "int") {
      sizes.int_bytes = value;
    } else if (name == "key") {
      sizes.key_bytes = value;
    } else {
      throw ConfigError("--sizes: unknown field '" + name + "'");
    }
  }
  return sizes;
}

std::vector<Property>
parse_properties(const std::vector<std::string>& names)
{
  std::vector<Property> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(all_properties.begin(), all_properties.end());
    } else {
      out.push_back(parse_property(n));
    }
  }
  return out;
}

void
write_file(const fs::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << text;
}

struct Options
{
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string sizes;
  std::vector<std::string> properties;
  std::string mutation = "none";
  int figure = 0;
  std::uint32_t members = 0;
  bool closed_only = false;
  std::uint64_t first_seed = 1;
  std::size_t seed_count = 50;
  std::size_t events = 200;
};

Scenario
load(const Options& o)
{
  auto s = load_scenario(o.scenario);
  if (o.seed) {
    s.seed = *o.seed;
  }
  if (!o.sizes.empty()) {
    s.sizes = parse_sizes(o.sizes, s.sizes);
  }
  return s;
}

Mutation
mutation_of(const Options& o)
{
  return parse_mutation(o.mutation);
}

int
cmd_simulate(const Options& o)
{
  auto r = run_scenario(load(o), mutation_of(o));
  if (!r.scenario.checks.empty()) {
    run_checks(r, {});
  }
  const auto report = render_report(r);
  if (o.out.empty()) {
    std::cout << report;
  } else {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "report.txt", report);
    write_file(fs::path(o.out) / "transcript.tsv", render_transcript(r));
    std::cout << "wrote " << (fs::path(o.out) / "report.txt").string() << " and transcript.tsv\n";
  }
  return r.invariants_hold() && r.properties_hold() ? ok : property_failure;
}

int
cmd_verify_scenario(const Options& o)
{
  auto r = run_scenario(load(o), mutation_of(o));
  auto props = parse_properties(o.properties);
  if (props.empty() && r.scenario.checks.empty()) {
    props.assign(all_properties.begin(), all_properties.end());
  }
  run_checks(r, props);
  const auto text = render_verdicts(r);
  std::cout << "seed " << r.scenario.seed << " version " << SGRS_VERSION << '\n';
  std::cout << "invariants: " << (r.invariants_hold() ? "PASS" : "FAIL") << '\n' << text;
  const bool pass = r.invariants_hold() && r.properties_hold();
  if (!pass && !o.out.empty()) {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "witnesses.txt", text);
  }
  return pass ? ok : property_failure;
}

int
cmd_verify_churn(const Options& o)
{
  auto props = parse_properties(o.properties);
  if (props.empty()) {
    props.assign(all_properties.begin(), all_properties.end());
  }
  std::map<Property, std::size_t> failures;
  std::size_t invariant_failures = 0;
  std::ostringstream witnesses;
  SizeModel sizes = o.sizes.empty() ? SizeModel{} : parse_sizes(o.sizes, {});
  std::cout << "churn suite: seeds " << o.first_seed << ".." << o.first_seed + o.seed_count - 1
            << ", " << o.events << " events, version " << SGRS_VERSION << '\n';
  for (std::size_t i = 0; i < o.seed_count; i++) {
    const auto seed = o.first_seed + i;
    Simulation sim(seed, sizes, mutation_of(o));
    ChurnConfig cfg;
    cfg.seed = seed;
    cfg.events = o.events;
    run_churn(sim, cfg);
    bool clean = true;
    for (const auto& out : sim.outcomes()) {
      clean = clean && out.violations.empty();
    }
    invariant_failures += clean ? 0 : 1;
    std::cout << "seed " << seed << ": invariants " << (clean ? "PASS" : "FAIL");
    for (const auto& v : check_properties(props, sim)) {
      std::cout << ", " << property_name(v.property) << ' ' << (v.pass() ? "PASS" : "FAIL");
      if (!v.pass()) {
        failures[v.property]++;
        witnesses << "seed " << seed << ' ' << property_name(v.property) << '\n';
        for (const auto& f : v.findings) {
          witnesses << "  " << f.attacker << " derives " << f.target << '\n';
          for (const auto& line : f.witness) {
            witnesses << "    " << line << '\n';
          }
        }
      }
    }
    std::cout << '\n';
  }
  const bool pass = invariant_failures == 0 && failures.empty();
  std::cout << "summary: invariants " << (invariant_failures ? "FAIL" : "PASS");
  for (auto p : props) {
    std::cout << ", " << property_name(p) << ' ' << (failures[p] ? "FAIL" : "PASS") << " ("
              << failures[p] << "/" << o.seed_count << " seeds failing)";
  }
  std::cout << '\n';
  if (!pass && !o.out.empty()) {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / "witnesses.txt", witnesses.str());
  }
  return pass ? ok : property_failure;
}

int
cmd_figures(const Options& o)
{
  const auto sizes = o.sizes.empty() ? SizeModel{} : parse_sizes(o.sizes, {});
  FigureData data;
  try {
    data = emit_figure(o.figure, sizes);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usage;
  }
  const auto csv = figure_csv(data);
  const auto meta = figure_metadata(data, sizes);
  if (o.out.empty()) {
    std::cout << csv << '\n' << meta;
    return ok;
  }
  fs::create_directories(o.out);
  const auto stem = "fig" + std::to_string(o.figure);
  write_file(fs::path(o.out) / (stem + ".csv"), csv);
  write_file(fs::path(o.out) / (stem + ".meta.txt"), meta);
  std::cout << "wrote " << stem << ".csv and " << stem << ".meta.txt to " << o.out << '\n';
  return ok;
}

int
cmd_enumerate(const Options& o)
{
  const auto n = o.members;
  const auto closed = count_keys_closed_form(n);
  std::cout << "N " << n << '\n';
  std::cout << "closed  W " << closed.w << "  Z " << closed.z << '\n';
  if (o.closed_only) {
    return ok;
  }
  if (n > bruteforce_limit) {
    std::cerr << "error: brute force needs 3 <= N <= " << bruteforce_limit << '\n';
    return validation_failure;
  }
  std::vector<MemberId> ids;
  for (std::uint32_t i = 1; i <= n; i++) {
    ids.emplace_back(i);
  }
  SeededRng rng(o.seed.value_or(0));
  const auto g = bootstrap_group(GroupId{ 1 }, ids, rng);
  const auto brute = count_keys_bruteforce(g);
  const auto z = brute.z_per_member.begin()->second;
  std::cout << "brute   W " << brute.w_semantic << "  Z " << z << '\n';
  std::cout << "delta   W " << static_cast<std::int64_t>(closed.w - brute.w_semantic) << "  Z "
            << static_cast<std::int64_t>(closed.z - z) << '\n';
  return ok;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "SGRS group key agreement simulator" };
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(SGRS_VERSION));
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "override the scenario seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--sizes", o.sizes, "size model, e.g. int=4,key=32");
#ifdef SGRS_ENABLE_MUTATIONS
    cmd->add_option("--mutation", o.mutation,
                    "disable one rekeying step: none, join-key-mix, leave-rehash, "
                    "merge-sponsor-rehash, partition-g");
#endif
  };

  auto* simulate = app.add_subcommand("simulate", "run a scenario file and write its report");
  simulate->add_option("scenario", o.scenario, "scenario file")->required();
  add_common(simulate);

  auto* verify = app.add_subcommand("verify", "run property checks on a scenario or churn suite");
  verify->add_option("scenario", o.scenario, "scenario file; omit for the churn suite");
  verify->add_option("--properties", o.properties, "property names, or all")->delimiter(',');
  verify->add_option("--first-seed", o.first_seed, "churn suite first seed");
  verify->add_option("--seeds", o.seed_count, "churn suite seed count");
  verify->add_option("--events", o.events, "churn events per seed");
  add_common(verify);

  auto* figures = app.add_subcommand("figures", "emit figure data (10, 11, 12, 13)");
  figures->add_option("id", o.figure, "figure id")->required();
  figures->add_option("--out", o.out, "output directory");
  figures->add_option("--sizes", o.sizes, "size model, e.g. int=4,key=32");

  auto* keys = app.add_subcommand("enumerate-keys", "closed-form and brute-force key counts");
  keys->add_option("n", o.members, "group size")->required()->check(CLI::Range(3u, 62u));
  keys->add_flag("--closed-only", o.closed_only, "skip the brute-force count");
  keys->add_option("--seed", o.seed, "bootstrap seed for the brute-force group");

  auto* table = app.add_subcommand("table1", "render the encoded cost comparison table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const auto code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(o);
    }
    if (verify->parsed()) {
      return o.scenario.empty() ? cmd_verify_churn(o) : cmd_verify_scenario(o);
    }
    if (figures->parsed()) {
      return cmd_figures(o);
    }
    if (keys->parsed()) {
      return cmd_enumerate(o);
    }
    if (table->parsed()) {
      std::cout << render_cost_table();
      return ok;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return parse_failure;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return validation_failure;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const Error& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return refusal;
  }
  return usage;
}
