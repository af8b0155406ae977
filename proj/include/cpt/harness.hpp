#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cpt/rng.hpp"  // derive_trial_seed
#include "cpt/tester.hpp"

namespace cpt {

// Flat key=value parameter bag with a canonical "a=1;b=2" serialization
// (keys sorted, ';' separated) so a CSV cell can carry a tester's full
// configuration. Keys and values must avoid ',', ';', '=' and newlines.
struct ParamBag {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get(const std::string& key) const;  // throws ValidationError if missing
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  double get_double(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, long long value);
  void set_double(const std::string& key, double value);

  std::string canonical() const;
  static ParamBag parse(const std::string& text);
};

// One executed trial, carrying everything needed to rerun it bit-exactly:
// the tester name, the instance file, the canonical parameter string and
// the derived seed the run consumed.
struct TrialRow {
  std::string tester;
  std::string instance;  // edge-list path; empty when params rebuild the input
  std::string params;
  long long trial = 0;
  uint64_t seed = 0;
  bool reject = false;
  std::string witness;  // colon-joined vertex ids, empty on accept
  long long attempts = 0;
  long long sim_rounds = 0;
  long long paper_rounds = 0;
  int max_bits_per_edge = 0;
};

// Runs one tester by name. Known testers: ck, tree, hclass, triangle, ks,
// ks-bounded, behrend, directed-diamond, directed-ck; see the README for
// each tester's parameter keys. Unknown names or parameters throw
// ValidationError.
TesterResult run_tester_once(const std::string& tester, const std::string& instance,
                             const ParamBag& params, uint64_t seed);

// `trials` independent runs; trial t uses derive_trial_seed(base_seed, t).
// The instance file is loaded once and shared.
std::vector<TrialRow> run_trials(const std::string& tester, const std::string& instance,
                                 const ParamBag& params, long long trials, uint64_t base_seed);

// Reruns the trial a row describes and compares verdict, witness and every
// counter; true when the replay is bit-identical.
bool replay_matches(const TrialRow& row);

std::string witness_string(const std::vector<int>& witness);

// Wilson score interval for hits/trials at z standard normal deviations
// (default 95%).
std::pair<double, double> wilson_ci(long long hits, long long trials, double z = 1.959964);

struct TrialSummary {
  long long trials = 0;
  long long rejects = 0;
  double reject_rate = 0.0;
  double ci_lo = 0.0, ci_hi = 1.0;
  long long max_paper_rounds = 0;
  int max_bits_per_edge = 0;
};
TrialSummary summarize(const std::vector<TrialRow>& rows);

// CSV with a fixed header; fields must not contain ',' or newlines.
std::string trials_csv_header();
std::string to_csv_row(const TrialRow& row);
std::string to_csv(const std::vector<TrialRow>& rows);
std::vector<TrialRow> parse_trials_csv(const std::string& text);

std::string read_text_file(const std::string& path);  // throws ValidationError
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cpt
