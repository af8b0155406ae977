// Command-line workbench: instance generation, tester runs with CSV
// reporting, exact reference queries, and replay verification.
//
// Exit codes: 0 success, 1 a requested check failed (replay mismatch),
// 2 invalid input or usage, 3 a resource bound was exceeded.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpt/errors.hpp"
#include "cpt/generators.hpp"
#include "cpt/graph.hpp"
#include "cpt/harness.hpp"
#include "cpt/oracle.hpp"
#include "cpt/rng.hpp"
#include "cpt/tester_anchored.hpp"
#include "cpt/tester_behrend.hpp"
#include "cpt/tester_directed.hpp"

namespace {

using namespace cpt;

struct GenArgs {
  std::string out;
  std::string mode;  // planted, clique-packing, hfree, gnm, dag, behrend-bk, behrend-bc, gapdisj
  std::string pattern;
  long long n = 0, m = 0, s = 0, layer = 0, copies = 0, nu = 0, overlap = 0;
  double eps = 1.0;
  uint64_t seed = 0;
};

struct RunArgs {
  std::string tester;
  std::string instance;
  std::string csv;
  long long trials = 100;
  uint64_t seed = 0;
  std::vector<std::string> params;  // raw key=value pairs
  std::map<std::string, std::string> flags;
};

struct OracleArgs {
  std::string query;
  std::string instance;
  std::string pattern;
  long long k = 5;
};

struct ReportArgs {
  std::string csv;
  bool replay = false;
  bool replay_all = false;
};

std::string trimmed(const std::string& s) {
  size_t lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  size_t hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

// Feed key=value lines into the options of the active subcommand. Values for
// options already given on the command line are ignored, so explicit flags
// always win. Runs after parsing, because CLI11 only reads config files
// attached to the top-level app, not to subcommands.
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("config " + path + " line " + std::to_string(lineno) +
                            ": expected key=value");
    entries.emplace_back(trimmed(t.substr(0, eq)), trimmed(t.substr(eq + 1)));
  }
  std::set<CLI::Option*> from_config;
  for (const auto& [key, value] : entries) {
    CLI::Option* op = sub.get_option_no_throw("--" + key);
    if (op == nullptr)
      throw ValidationError("config " + path + ": unknown key '" + key + "' for subcommand '" +
                            sub.get_name() + "'");
    if (op->count() > 0 && from_config.count(op) == 0) continue;
    op->add_result(value);
    from_config.insert(op);
  }
  for (CLI::Option* op : from_config) op->run_callback();
}

uint64_t env_seed_or(uint64_t fallback) {
  const char* env = std::getenv("SEED");
  if (!env) return fallback;
  try {
    size_t used = 0;
    uint64_t v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("SEED environment variable is not an integer: ") + env);
  }
}

// (X, Y) with |X intersect Y| == overlap, element names shuffled by seed.
std::pair<std::vector<int>, std::vector<int>> split_universe(long long nu, long long overlap,
                                                             uint64_t seed) {
  if (overlap < 0 || overlap > nu) throw ValidationError("overlap must lie in [0, nU]");
  std::vector<int> perm;
  for (int i = 1; i <= nu; i++) perm.push_back(i);
  Rng rng(seed);
  for (size_t i = perm.size(); i > 1; i--) std::swap(perm[i - 1], perm[rng.below(i)]);
  long long rest = nu - overlap;
  std::vector<int> x(perm.begin(), perm.begin() + overlap + rest / 2);
  std::vector<int> y(perm.begin(), perm.begin() + overlap);
  y.insert(y.end(), perm.begin() + overlap + rest / 2, perm.end());
  return {x, y};
}

int cmd_gen(const GenArgs& a) {
  uint64_t seed = env_seed_or(a.seed);
  std::string edges_path = a.out + ".edges";
  std::string sidecar_path = a.out + ".json";
  std::optional<nlohmann::json> sidecar;

  if (a.mode == "planted") {
    PlantedInstance inst = plant_disjoint_copies(
        static_cast<int>(a.n), static_cast<int>(a.m), pattern_by_name(a.pattern), a.eps, seed);
    write_text_file(edges_path, write_graph(inst.graph));
    sidecar = inst.sidecar_json();
  } else if (a.mode == "clique-packing") {
    PlantedInstance inst = plant_clique_packing(static_cast<int>(a.n),
                                                static_cast<int>(a.copies),
                                                static_cast<int>(a.s), seed);
    write_text_file(edges_path, write_graph(inst.graph));
    sidecar = inst.sidecar_json();
  } else if (a.mode == "hfree") {
    Graph g = make_h_free(static_cast<int>(a.n), static_cast<int>(a.m),
                          pattern_by_name(a.pattern), seed);
    write_text_file(edges_path, write_graph(g));
  } else if (a.mode == "gnm") {
    write_text_file(edges_path,
                    write_graph(gen_gnm(static_cast<int>(a.n), static_cast<int>(a.m), seed)));
  } else if (a.mode == "dag") {
    write_text_file(
        edges_path,
        write_digraph(gen_random_dag(static_cast<int>(a.n), static_cast<int>(a.m), seed)));
  } else if (a.mode == "behrend-bk" || a.mode == "behrend-bc") {
    ResidueFamily fam = build_behrend_set(a.layer, static_cast<int>(a.s));
    LayeredGraph g = a.mode == "behrend-bk" ? build_bk(static_cast<int>(a.s), a.layer, fam)
                                            : build_bc(static_cast<int>(a.s), a.layer, fam);
    write_text_file(edges_path, write_graph(g.graph));
    sidecar = g.sidecar_json();
  } else if (a.mode == "gapdisj") {
    auto [x, y] = split_universe(a.nu, a.overlap, seed);
    GapDisjInstance inst = gen_gapdisj(a.nu, x, y);
    write_text_file(edges_path, write_digraph(inst.graph));
    sidecar = inst.sidecar_json();
  } else {
    throw ValidationError("pick one generator mode (see gen --help)");
  }

  std::cout << "wrote " << edges_path << "\n";
  if (sidecar) {
    write_text_file(sidecar_path, sidecar->dump(2) + "\n");
    std::cout << "wrote " << sidecar_path << "\n";
  }
  return 0;
}

int cmd_run(const RunArgs& a) {
  ParamBag params;
  for (const std::string& kvtext : a.params) {
    size_t eq = kvtext.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("--param expects key=value, got '" + kvtext + "'");
    params.set(kvtext.substr(0, eq), kvtext.substr(eq + 1));
  }
  for (const auto& [key, value] : a.flags) params.set(key, value);

  uint64_t seed = env_seed_or(a.seed);
  std::vector<TrialRow> rows = run_trials(a.tester, a.instance, params, a.trials, seed);
  for (const TrialRow& row : rows) {
    std::cout << "trial " << row.trial << " seed " << row.seed << ' '
              << (row.reject ? "reject" : "accept");
    if (!row.witness.empty()) std::cout << " witness " << row.witness;
    std::cout << "\n";
  }
  TrialSummary s = summarize(rows);
  std::cout << "trials " << s.trials << " rejects " << s.rejects << " reject_rate "
            << s.reject_rate << " ci95 [" << s.ci_lo << ',' << s.ci_hi << "] max_paper_rounds "
            << s.max_paper_rounds << " max_bits_per_edge " << s.max_bits_per_edge << "\n";
  if (!a.csv.empty()) {
    write_text_file(a.csv, to_csv(rows));
    std::cout << "wrote " << a.csv << "\n";
  }
  return 0;
}

std::string joined(const std::vector<int>& xs, char sep) {
  std::string out;
  for (size_t i = 0; i < xs.size(); i++) {
    if (i) out += sep;
    out += std::to_string(xs[i]);
  }
  return out;
}

int cmd_oracle(const OracleArgs& a) {
  if (a.query == "enumerate") {
    std::vector<Pattern> all = oracle::enumerate_connected(static_cast<int>(a.k));
    std::cout << all.size() << " connected graphs on " << a.k << " vertices\n";
    for (const Pattern& p : all) {
      std::cout << p.k() << ' ' << p.edge_count() << ':';
      for (const Edge& e : p.graph().edges()) std::cout << ' ' << e.first << '-' << e.second;
      std::cout << "\n";
    }
    return 0;
  }
  if (a.query == "member-H") {
    Pattern h = pattern_by_name(a.pattern);
    std::optional<Edge> anchor = find_anchor_edge(h);
    if (anchor)
      std::cout << "anchor edge (" << anchor->first << "," << anchor->second << ")\n";
    else
      std::cout << "not a member\n";
    return 0;
  }

  if (a.instance.empty()) throw ValidationError("this query needs --instance");
  std::string text = read_text_file(a.instance);
  bool directed = edge_list_is_directed(text);

  if (directed) {
    DiGraph g = parse_digraph(text);
    DiPattern h = diamond_pattern();
    if (a.pattern != "diamond") {
      if (a.pattern.size() == 3 && (a.pattern[0] == 'd' || a.pattern[0] == 'D') &&
          (a.pattern[1] == 'c' || a.pattern[1] == 'C') && a.pattern[2] >= '3' &&
          a.pattern[2] <= '8')
        h = directed_cycle_pattern(a.pattern[2] - '0');
      else
        throw ValidationError("directed patterns: diamond, dc3..dc8");
    }
    if (a.query == "contains") {
      std::optional<std::vector<int>> w = oracle::find_copy(g, h);
      std::cout << (w ? "copy " + joined(*w, ':') : std::string("no copy")) << "\n";
    } else if (a.query == "count") {
      std::cout << oracle::count_copies(g, h) << "\n";
    } else if (a.query == "packing") {
      oracle::Packing p = oracle::packing_lb(g, h);
      std::cout << "packing " << p.count << "\n";
      for (const std::vector<Edge>& copy : p.copies) {
        for (size_t i = 0; i < copy.size(); i++)
          std::cout << (i ? " " : "") << copy[i].first << '-' << copy[i].second;
        std::cout << "\n";
      }
    } else {
      throw ValidationError("directed instances support contains, count and packing");
    }
    return 0;
  }

  Graph g = parse_graph(text);
  Pattern h = pattern_by_name(a.pattern);
  if (a.query == "contains") {
    std::optional<std::vector<int>> w = oracle::find_copy(g, h);
    std::cout << (w ? "copy " + joined(*w, ':') : std::string("no copy")) << "\n";
  } else if (a.query == "count") {
    std::cout << oracle::count_copies(g, h) << "\n";
  } else if (a.query == "packing") {
    oracle::Packing p = oracle::packing_lb(g, h);
    std::cout << "packing " << p.count << "\n";
    for (const std::vector<Edge>& copy : p.copies) {
      for (size_t i = 0; i < copy.size(); i++)
        std::cout << (i ? " " : "") << copy[i].first << '-' << copy[i].second;
      std::cout << "\n";
    }
  } else if (a.query == "distance") {
    std::cout << oracle::min_deletion_to_h_free(g, h) << "\n";
  } else {
    throw ValidationError("unknown query '" + a.query +
                          "' (contains, count, packing, distance, enumerate, member-H)");
  }
  return 0;
}

int cmd_report(const ReportArgs& a) {
  std::vector<TrialRow> rows = parse_trials_csv(read_text_file(a.csv));
  std::map<std::string, std::vector<TrialRow>> groups;
  for (const TrialRow& row : rows)
    groups[row.tester + " " + row.instance + " " + row.params].push_back(row);
  for (const auto& [key, group] : groups) {
    TrialSummary s = summarize(group);
    std::cout << key << ": trials " << s.trials << " rejects " << s.rejects << " reject_rate "
              << s.reject_rate << " ci95 [" << s.ci_lo << ',' << s.ci_hi
              << "] max_bits_per_edge " << s.max_bits_per_edge << "\n";
  }
  if (!a.replay && !a.replay_all) return 0;

  long long checked = 0, mismatched = 0;
  for (const TrialRow& row : rows) {
    if (!a.replay_all && !row.reject) continue;
    checked++;
    if (!replay_matches(row)) {
      mismatched++;
      std::cout << "replay mismatch: " << to_csv_row(row) << "\n";
    }
  }
  std::cout << "replayed " << checked << " rows, " << mismatched << " mismatches\n";
  return mismatched == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for distributed subgraph-freeness testers"};
  app.require_subcommand(1);

  GenArgs g;
  CLI::App* gen = app.add_subcommand("gen", "generate an instance (edge list + JSON sidecar)");
  gen->add_option("--out", g.out, "output path prefix")->required();
  std::map<std::string, bool> mode_flags;
  for (const char* mode : {"planted", "clique-packing", "hfree", "gnm", "dag", "behrend-bk",
                           "behrend-bc", "gapdisj"})
    gen->add_flag(std::string("--") + mode, mode_flags[mode]);
  gen->add_option("--pattern", g.pattern, "pattern name, e.g. C5, K4, P4, S3");
  gen->add_option("--n", g.n, "vertex count");
  gen->add_option("--m", g.m, "edge count");
  gen->add_option("--s", g.s, "clique size / layer count");
  gen->add_option("--layer", g.layer, "layer width (prime)");
  gen->add_option("--copies", g.copies, "planted copy count");
  gen->add_option("--nU", g.nu, "universe size");
  gen->add_option("--overlap", g.overlap, "size of the planted intersection");
  gen->add_option("--eps", g.eps, "certified copy density");
  gen->add_option("--seed", g.seed, "generator seed (SEED env overrides)");

  RunArgs r;
  CLI::App* run = app.add_subcommand("run", "run seeded trials of one tester");
  run->add_option("tester", r.tester,
                  "ck | tree | hclass | triangle | ks | ks-bounded | behrend | "
                  "directed-diamond | directed-ck")
      ->required();
  run->add_option("--instance", r.instance, "edge-list file");
  run->add_option("--trials", r.trials, "number of seeded trials")->capture_default_str();
  run->add_option("--seed", r.seed, "base seed; trial t uses a derived seed (SEED env overrides)");
  run->add_option("--csv", r.csv, "write per-trial rows to this CSV file");
  run->add_option("--param", r.params, "extra key=value tester parameter (repeatable)");
  std::map<std::string, std::string> flag_store;
  for (const char* key : {"k", "eps", "s", "alpha", "pattern", "parents", "variant", "layer",
                          "reps", "m_estimate", "attempts"})
    run->add_option(std::string("--") + key, flag_store[key]);

  OracleArgs o;
  CLI::App* orc = app.add_subcommand("oracle", "exact reference queries");
  orc->add_option("query", o.query, "contains | count | packing | distance | enumerate | member-H")
      ->required();
  orc->add_option("--instance", o.instance, "edge-list file");
  orc->add_option("--pattern", o.pattern, "pattern name; 'diamond' or 'dck' on directed input");
  orc->add_option("--k", o.k, "vertex count for enumerate")->capture_default_str();

  ReportArgs rep;
  CLI::App* report = app.add_subcommand("report", "summarize a trials CSV");
  report->add_option("--csv", rep.csv, "trials CSV produced by run")->required();
  report->add_flag("--replay", rep.replay, "rerun every rejecting row and verify bit-equality");
  report->add_flag("--replay-all", rep.replay_all, "rerun every row");

  std::string config_path;
  for (CLI::App* sub : {gen, run, orc, report})
    sub->add_option("--config", config_path,
                    "flat key=value file, '#' comments; command-line flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty())
      for (CLI::App* sub : {gen, run, orc, report})
        if (sub->parsed()) apply_config_file(*sub, config_path);
    if (*gen) {
      int picked = 0;
      for (const auto& [mode, on] : mode_flags)
        if (on) {
          picked++;
          g.mode = mode;
        }
      if (picked != 1) throw ValidationError("pick exactly one generator mode");
      return cmd_gen(g);
    }
    if (*run) {
      for (const auto& [key, value] : flag_store)
        if (!value.empty()) r.flags[key] = value;
      return cmd_run(r);
    }
    if (*orc) return cmd_oracle(o);
    if (*report) return cmd_report(rep);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource bound: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
