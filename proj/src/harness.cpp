#include "cpt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "cpt/errors.hpp"
#include "cpt/graph.hpp"
#include "cpt/rng.hpp"
#include "cpt/tester_anchored.hpp"
#include "cpt/tester_behrend.hpp"
#include "cpt/tester_cliques.hpp"
#include "cpt/tester_cycles.hpp"
#include "cpt/tester_directed.hpp"
#include "cpt/tester_trees.hpp"

namespace cpt {

namespace {

void check_token(const std::string& s, const char* what) {
  for (char c : s)
    if (c == ',' || c == ';' || c == '=' || c == '\n' || c == '\r')
      throw ValidationError(std::string(what) + " contains a reserved character: " + s);
}

void check_csv_field(const std::string& s, const char* what) {
  for (char c : s)
    if (c == ',' || c == '\n' || c == '\r')
      throw ValidationError(std::string(what) + " cannot be stored in CSV: " + s);
}

long long parse_int(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + " is not an integer: " + s);
  }
}

double parse_real(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + " is not a number: " + s);
  }
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ':'))
    out.push_back(static_cast<int>(parse_int(item, what)));
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

// The inputs a dispatch target may need, loaded once per trial batch.
struct LoadedInstance {
  std::optional<Graph> graph;
  std::optional<DiGraph> digraph;
  std::optional<LayeredGraph> layered;
};

const Graph& need_graph(const LoadedInstance& in, const std::string& tester) {
  if (!in.graph)
    throw ValidationError("tester '" + tester + "' needs an undirected edge-list instance");
  return *in.graph;
}

const DiGraph& need_digraph(const LoadedInstance& in, const std::string& tester) {
  if (!in.digraph)
    throw ValidationError("tester '" + tester + "' needs a directed edge-list instance");
  return *in.digraph;
}

void check_keys(const std::string& tester, const ParamBag& params,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params.kv) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError("unknown parameter '" + key + "' for tester '" + tester + "'");
  }
}

LoadedInstance load_instance(const std::string& tester, const std::string& instance,
                             const ParamBag& params) {
  LoadedInstance in;
  if (tester == "behrend") {
    int s = static_cast<int>(params.get_int("s"));
    long long layer = params.get_int("layer");
    std::string variant = params.get_or("variant", "bk");
    if (variant != "bk" && variant != "bc")
      throw ValidationError("variant must be 'bk' or 'bc'");
    ResidueFamily fam = build_behrend_set(layer, s);
    in.layered = variant == "bk" ? build_bk(s, layer, fam) : build_bc(s, layer, fam);
    return in;
  }
  if (instance.empty()) throw ValidationError("tester '" + tester + "' needs --instance");
  std::string text = read_text_file(instance);
  if (edge_list_is_directed(text))
    in.digraph = parse_digraph(text);
  else
    in.graph = parse_graph(text);
  return in;
}

TesterResult run_loaded(const std::string& tester, const LoadedInstance& in,
                        const ParamBag& params, uint64_t seed) {
  if (tester == "ck") {
    check_keys(tester, params, {"k", "eps", "attempts"});
    CkOptions opt;
    opt.eps = params.get_double("eps");
    opt.seed = seed;
    opt.attempts_override = params.get_int_or("attempts", 0);
    return test_ck_freeness(need_graph(in, tester), static_cast<int>(params.get_int("k")), opt);
  }
  if (tester == "tree") {
    check_keys(tester, params, {"parents", "attempts"});
    TreePattern t(parse_int_list(params.get("parents"), "parents"));
    TreeTestOptions opt;
    opt.seed = seed;
    opt.attempts_override = params.get_int_or("attempts", 0);
    return test_tree_freeness(need_graph(in, tester), t, opt);
  }
  if (tester == "hclass") {
    check_keys(tester, params, {"pattern", "eps", "attempts"});
    AnchoredMember member = make_anchored_member(pattern_by_name(params.get("pattern")));
    AnchoredTestOptions opt;
    opt.eps = params.get_double("eps");
    opt.seed = seed;
    opt.attempts_override = params.get_int_or("attempts", 0);
    return test_anchored_freeness(need_graph(in, tester), member.recipe, opt);
  }
  if (tester == "triangle") {
    check_keys(tester, params, {});
    CliqueOptions opt;
    opt.seed = seed;
    return test_triangle_freeness(need_graph(in, tester), opt);
  }
  if (tester == "ks") {
    check_keys(tester, params, {"s", "eps", "m_estimate"});
    CliqueOptions opt;
    opt.seed = seed;
    std::optional<long long> est;
    if (params.has("m_estimate")) est = params.get_int("m_estimate");
    return test_ks_freeness(need_graph(in, tester), static_cast<int>(params.get_int("s")),
                            params.get_double("eps"), est, opt);
  }
  if (tester == "ks-bounded") {
    check_keys(tester, params, {"s", "alpha", "eps"});
    CliqueOptions opt;
    opt.seed = seed;
    return test_ks_bounded_degree(need_graph(in, tester), static_cast<int>(params.get_int("s")),
                                  params.get_double("alpha"), params.get_double("eps"), opt);
  }
  if (tester == "behrend") {
    check_keys(tester, params, {"s", "layer", "variant", "reps"});
    BehrendDetectOptions opt;
    opt.seed = seed;
    opt.max_reps = params.get_int_or("reps", 1);
    return detect_ks_behrend(*in.layered, opt);
  }
  if (tester == "directed-diamond") {
    check_keys(tester, params, {"eps", "attempts"});
    DiamondOptions opt;
    opt.eps = params.get_double("eps");
    opt.seed = seed;
    opt.attempts_override = params.get_int_or("attempts", 0);
    return test_diamond_freeness(need_digraph(in, tester), opt);
  }
  if (tester == "directed-ck") {
    check_keys(tester, params, {"k", "eps", "attempts"});
    CkOptions opt;
    opt.eps = params.get_double("eps");
    opt.seed = seed;
    opt.attempts_override = params.get_int_or("attempts", 0);
    return test_directed_ck_freeness(need_digraph(in, tester),
                                     static_cast<int>(params.get_int("k")), opt);
  }
  throw ValidationError("unknown tester '" + tester +
                        "' (expected ck, tree, hclass, triangle, ks, ks-bounded, behrend, "
                        "directed-diamond or directed-ck)");
}

TrialRow make_row(const std::string& tester, const std::string& instance, const ParamBag& params,
                  long long trial, uint64_t seed, const TesterResult& res) {
  TrialRow row;
  row.tester = tester;
  row.instance = instance;
  row.params = params.canonical();
  row.trial = trial;
  row.seed = seed;
  row.reject = res.reject;
  row.witness = witness_string(res.witness);
  row.attempts = res.attempts;
  row.sim_rounds = res.sim_rounds;
  row.paper_rounds = res.paper_rounds;
  row.max_bits_per_edge = res.max_bits_per_edge;
  return row;
}

}  // namespace

std::string ParamBag::get(const std::string& key) const {
  auto it = kv.find(key);
  if (it == kv.end()) throw ValidationError("missing parameter '" + key + "'");
  return it->second;
}

long long ParamBag::get_int(const std::string& key) const {
  return parse_int(get(key), key.c_str());
}

long long ParamBag::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double ParamBag::get_double(const std::string& key) const {
  return parse_real(get(key), key.c_str());
}

std::string ParamBag::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

void ParamBag::set(const std::string& key, const std::string& value) {
  check_token(key, "parameter key");
  check_token(value, "parameter value");
  if (key.empty()) throw ValidationError("parameter key cannot be empty");
  kv[key] = value;
}

void ParamBag::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void ParamBag::set_double(const std::string& key, double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  set(key, out.str());
}

std::string ParamBag::canonical() const {
  std::string out;
  for (const auto& [key, value] : kv) {
    if (!out.empty()) out += ';';
    out += key + "=" + value;
  }
  return out;
}

ParamBag ParamBag::parse(const std::string& text) {
  ParamBag bag;
  if (text.empty()) return bag;
  for (const std::string& item : split(text, ';')) {
    size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("expected key=value, got '" + item + "'");
    bag.set(item.substr(0, eq), item.substr(eq + 1));
  }
  return bag;
}

TesterResult run_tester_once(const std::string& tester, const std::string& instance,
                             const ParamBag& params, uint64_t seed) {
  LoadedInstance in = load_instance(tester, instance, params);
  return run_loaded(tester, in, params, seed);
}

std::vector<TrialRow> run_trials(const std::string& tester, const std::string& instance,
                                 const ParamBag& params, long long trials, uint64_t base_seed) {
  if (trials < 1) throw ValidationError("trial count must be positive");
  LoadedInstance in = load_instance(tester, instance, params);
  std::vector<TrialRow> rows;
  rows.reserve(static_cast<size_t>(trials));
  for (long long t = 0; t < trials; t++) {
    uint64_t seed = derive_trial_seed(base_seed, t);
    rows.push_back(make_row(tester, instance, params, t, seed,
                            run_loaded(tester, in, params, seed)));
  }
  return rows;
}

bool replay_matches(const TrialRow& row) {
  TesterResult res =
      run_tester_once(row.tester, row.instance, ParamBag::parse(row.params), row.seed);
  return res.reject == row.reject && witness_string(res.witness) == row.witness &&
         res.attempts == row.attempts && res.sim_rounds == row.sim_rounds &&
         res.paper_rounds == row.paper_rounds && res.max_bits_per_edge == row.max_bits_per_edge;
}

std::string witness_string(const std::vector<int>& witness) {
  std::string out;
  for (size_t i = 0; i < witness.size(); i++) {
    if (i) out += ':';
    out += std::to_string(witness[i]);
  }
  return out;
}

std::pair<double, double> wilson_ci(long long hits, long long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  if (hits < 0 || hits > trials) throw ValidationError("hits must lie in [0, trials]");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

TrialSummary summarize(const std::vector<TrialRow>& rows) {
  TrialSummary s;
  s.trials = static_cast<long long>(rows.size());
  for (const TrialRow& row : rows) {
    if (row.reject) s.rejects++;
    s.max_paper_rounds = std::max(s.max_paper_rounds, row.paper_rounds);
    s.max_bits_per_edge = std::max(s.max_bits_per_edge, row.max_bits_per_edge);
  }
  if (s.trials > 0) s.reject_rate = static_cast<double>(s.rejects) / s.trials;
  auto [lo, hi] = wilson_ci(s.rejects, s.trials);
  s.ci_lo = lo;
  s.ci_hi = hi;
  return s;
}

std::string trials_csv_header() {
  return "tester,instance,params,trial,seed,reject,witness,attempts,sim_rounds,paper_rounds,"
         "max_bits_per_edge";
}

std::string to_csv_row(const TrialRow& row) {
  check_csv_field(row.tester, "tester");
  check_csv_field(row.instance, "instance");
  check_csv_field(row.params, "params");
  check_csv_field(row.witness, "witness");
  std::ostringstream out;
  out << row.tester << ',' << row.instance << ',' << row.params << ',' << row.trial << ','
      << row.seed << ',' << (row.reject ? 1 : 0) << ',' << row.witness << ',' << row.attempts
      << ',' << row.sim_rounds << ',' << row.paper_rounds << ',' << row.max_bits_per_edge;
  return out.str();
}

std::string to_csv(const std::vector<TrialRow>& rows) {
  std::string out = trials_csv_header() + "\n";
  for (const TrialRow& row : rows) out += to_csv_row(row) + "\n";
  return out;
}

std::vector<TrialRow> parse_trials_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<TrialRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lineno++;
    if (lineno == 1) {
      if (line != trials_csv_header()) throw ParseError(1, "unexpected CSV header: " + line);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 11)
      throw ParseError(lineno, "expected 11 fields, got " + std::to_string(f.size()));
    TrialRow row;
    row.tester = f[0];
    row.instance = f[1];
    row.params = f[2];
    row.trial = parse_int(f[3], "trial");
    try {
      size_t used = 0;
      row.seed = std::stoull(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
    } catch (const std::exception&) {
      throw ParseError(lineno, "seed is not an unsigned integer: " + f[4]);
    }
    long long reject = parse_int(f[5], "reject");
    if (reject != 0 && reject != 1) throw ParseError(lineno, "reject must be 0 or 1");
    row.reject = reject == 1;
    row.witness = f[6];
    row.attempts = parse_int(f[7], "attempts");
    row.sim_rounds = parse_int(f[8], "sim_rounds");
    row.paper_rounds = parse_int(f[9], "paper_rounds");
    row.max_bits_per_edge = static_cast<int>(parse_int(f[10], "max_bits_per_edge"));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << text;
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace cpt
