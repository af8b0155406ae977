#include "cpt/harness.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"

#include "cpt/errors.hpp"
#include "cpt/graph.hpp"
#include "cpt/tester_behrend.hpp"
#include "cpt/tester_cycles.hpp"

using namespace cpt;

namespace {

// Writes an instance next to the test binary and removes it on scope exit.
struct TempFile {
  std::string path;
  TempFile(std::string name, const std::string& text) : path(std::move(name)) {
    write_text_file(path, text);
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("parameter bags have a canonical sorted form") {
  ParamBag bag;
  bag.set("k", "3");
  bag.set_double("eps", 0.5);
  bag.set_int("attempts", 40);
  CHECK(bag.canonical() == "attempts=40;eps=0.5;k=3");
  CHECK(ParamBag::parse(bag.canonical()).canonical() == bag.canonical());
  CHECK(ParamBag::parse("").kv.empty());

  CHECK(bag.get("k") == "3");
  CHECK(bag.get_int("k") == 3);
  CHECK(bag.get_double("eps") == doctest::Approx(0.5));
  CHECK(bag.get_int_or("missing", 7) == 7);
  CHECK(bag.get_or("missing", "x") == "x");

  CHECK_THROWS_AS(bag.get("missing"), ValidationError);
  CHECK_THROWS_AS(bag.get_int("eps"), ValidationError);
  CHECK_THROWS_AS(bag.set("a;b", "1"), ValidationError);
  CHECK_THROWS_AS(bag.set("a", "1,2"), ValidationError);
  CHECK_THROWS_AS(bag.set("", "1"), ValidationError);
  CHECK_THROWS_AS(ParamBag::parse("novalue"), ValidationError);
  CHECK_THROWS_AS(ParamBag::parse("=3"), ValidationError);
}

TEST_CASE("trial seeds derive deterministically and differ across trials") {
  CHECK(derive_trial_seed(1, 0) == derive_trial_seed(1, 0));
  CHECK(derive_trial_seed(1, 0) != derive_trial_seed(1, 1));
  CHECK(derive_trial_seed(1, 0) != derive_trial_seed(2, 0));
  std::vector<uint64_t> seen;
  for (long long t = 0; t < 100; t++) seen.push_back(derive_trial_seed(99, t));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("wilson interval matches published values") {
  auto [lo, hi] = wilson_ci(8, 10);
  CHECK(lo == doctest::Approx(0.4902).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.9433).epsilon(1e-3));

  auto [zlo, zhi] = wilson_ci(0, 50);
  CHECK(zlo == 0.0);
  CHECK(zhi < 0.10);
  auto [flo, fhi] = wilson_ci(50, 50);
  CHECK(fhi == doctest::Approx(1.0));
  CHECK(flo > 0.90);
  auto [elo, ehi] = wilson_ci(0, 0);
  CHECK(elo == 0.0);
  CHECK(ehi == 1.0);
  CHECK_THROWS_AS(wilson_ci(5, 4), ValidationError);
}

TEST_CASE("csv rows survive a round trip and reject malformed input") {
  TrialRow row;
  row.tester = "ck";
  row.instance = "some/path.edges";
  row.params = "eps=1;k=3";
  row.trial = 4;
  row.seed = 18446744073709551615ULL;  // largest uint64 survives
  row.reject = true;
  row.witness = "0:1:2";
  row.attempts = 17;
  row.sim_rounds = 51;
  row.paper_rounds = 1620;
  row.max_bits_per_edge = 24;

  TrialRow accept = row;
  accept.trial = 5;
  accept.reject = false;
  accept.witness = "";

  std::string csv = to_csv({row, accept});
  std::vector<TrialRow> parsed = parse_trials_csv(csv);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].seed == row.seed);
  CHECK(parsed[0].witness == "0:1:2");
  CHECK(parsed[0].reject);
  CHECK(parsed[1].witness == "");
  CHECK_FALSE(parsed[1].reject);
  CHECK(to_csv(parsed) == csv);

  CHECK_THROWS_AS(parse_trials_csv("bad header\n"), ParseError);
  CHECK_THROWS_AS(parse_trials_csv(trials_csv_header() + "\na,b,c\n"), ParseError);
  CHECK_THROWS_AS(parse_trials_csv(trials_csv_header() +
                                   "\nck,p,eps=1,0,1,2,,1,1,1,1\n"),
                  ParseError);

  TrialRow bad = row;
  bad.witness = "0,1";
  CHECK_THROWS_AS(to_csv_row(bad), ValidationError);
}

TEST_CASE("dispatch by name reproduces a direct tester call") {
  TempFile tri("harness_tri.edges", write_graph(Graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}})));

  ParamBag params;
  params.set_int("k", 3);
  params.set_double("eps", 0.75);
  TesterResult via = run_tester_once("ck", tri.path, params, 99);

  CkOptions opt;
  opt.eps = 0.75;
  opt.seed = 99;
  TesterResult direct = test_ck_freeness(Graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}), 3, opt);
  CHECK(via.reject == direct.reject);
  CHECK(via.witness == direct.witness);
  CHECK(via.attempts == direct.attempts);
  CHECK(via.sim_rounds == direct.sim_rounds);
  CHECK(via.paper_rounds == direct.paper_rounds);
  CHECK(via.max_bits_per_edge == direct.max_bits_per_edge);

  // The layered detector rebuilds its own input from parameters.
  ParamBag bparams;
  bparams.set_int("s", 3);
  bparams.set_int("layer", 5);
  bparams.set("variant", "bk");
  TesterResult bvia = run_tester_once("behrend", "", bparams, 7);
  BehrendDetectOptions bopt;
  bopt.seed = 7;
  TesterResult bdirect = detect_ks_behrend(build_bk(3, 5, build_behrend_set(5, 3)), bopt);
  CHECK(bvia.reject == bdirect.reject);
  CHECK(bvia.attempts == bdirect.attempts);
  CHECK(bvia.sim_rounds == bdirect.sim_rounds);

  CHECK_THROWS_WITH_AS(run_tester_once("nope", tri.path, {}, 1),
                       doctest::Contains("unknown tester"), ValidationError);
  ParamBag typo = params;
  typo.set("kk", "3");
  CHECK_THROWS_WITH_AS(run_tester_once("ck", tri.path, typo, 1),
                       doctest::Contains("unknown parameter"), ValidationError);
  CHECK_THROWS_WITH_AS(run_tester_once("ck", "", params, 1), doctest::Contains("--instance"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(run_tester_once("directed-ck", tri.path, params, 1),
                       doctest::Contains("directed edge-list"), ValidationError);
  CHECK_THROWS_AS(run_tester_once("ck", "no/such/file.edges", params, 1), ValidationError);
}

TEST_CASE("trial batches replay bit-identically from their rows") {
  TempFile tri("harness_batch.edges",
               write_graph(Graph(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}})));
  ParamBag params;
  params.set_int("k", 3);
  params.set_double("eps", 0.75);

  std::vector<TrialRow> rows = run_trials("ck", tri.path, params, 12, 31337);
  REQUIRE(rows.size() == 12);
  long long rejects = 0;
  for (long long t = 0; t < 12; t++) {
    CHECK(rows[t].trial == t);
    CHECK(rows[t].seed == derive_trial_seed(31337, t));
    CHECK(rows[t].params == "eps=0.75;k=3");
    if (rows[t].reject) rejects++;
  }
  CHECK(rejects >= 10);  // the triangle is present; detection is near-certain

  // Round-trip through CSV, then rerun every row.
  std::vector<TrialRow> parsed = parse_trials_csv(to_csv(rows));
  for (const TrialRow& row : parsed) CHECK(replay_matches(row));

  TrialSummary s = summarize(rows);
  CHECK(s.trials == 12);
  CHECK(s.rejects == rejects);
  CHECK(s.reject_rate == doctest::Approx(rejects / 12.0));
  CHECK(s.ci_lo < s.reject_rate);
  CHECK(s.ci_hi >= s.reject_rate);
  CHECK(s.max_bits_per_edge > 0);

  // A tampered row no longer replays.
  TrialRow forged = parsed[0];
  forged.attempts += 1;
  CHECK_FALSE(replay_matches(forged));

  CHECK_THROWS_AS(run_trials("ck", tri.path, params, 0, 1), ValidationError);
}
