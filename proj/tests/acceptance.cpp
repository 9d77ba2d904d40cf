// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "instances.hpp"
#include "km/cli.hpp"
#include "km/error.hpp"
#include "km/io.hpp"
#include "km/pipelines.hpp"
#include "km/steps.hpp"
#include "km/verify.hpp"

using namespace km;

namespace {

struct Verdict {
  bool ok = true;
  std::vector<std::string> why;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (why.size() < 5) why.push_back(what);
    }
  }
};

SuiteReport suite(const std::string& id, std::size_t instances = 0, bool exhaustive = false, bool calibrate = false,
                  std::uint64_t seed = 42) {
  SuiteSpec s;
  s.suite_id = id;
  s.instances = instances;
  s.exhaustive = exhaustive;
  s.calibrate = calibrate;
  s.seed = seed;
  return run_suite(s);
}

void require_suite(Verdict& v, const SuiteReport& r, std::size_t expected) {
  v.require(r.passed(), r.suite_id + (r.exhaustive ? " (exhaustive)" : "") + ": " +
                            std::to_string(r.failures.size()) + " failures" +
                            (r.failures.empty() ? "" : ", first: " + r.failures.front().message));
  v.require(r.instances == expected, r.suite_id + ": ran " + std::to_string(r.instances) + " instances");
}

// 1. conv / diffconv exact against float, convolution theorem and Parseval.
Verdict algebra() {
  Verdict v;
  require_suite(v, suite("conv-fourier", 200), 200);
  return v;
}

// 2. Spectral facts on every subset of Z5 and Z7 and on sampled instances.
Verdict spectral() {
  Verdict v;
  for (const char* id : {"spectral-nonneg", "odd-moment", "lp-monotone", "mean-zeroing"}) {
    require_suite(v, suite(id, 0, true), *exhaustive_instances(id));
    require_suite(v, suite(id, 200), 200);
  }
  return v;
}

// 3. Delta-function oracle picks the pairing, then 200 random triples.
Verdict adjoint() {
  Verdict v;
  const SuiteReport r = suite("adjoint", 200);
  require_suite(v, r, 200);
  const auto it = r.notes.find("variant");
  v.require(it != r.notes.end() && it->second != "none", "no pairing variant matched the delta oracle");
  if (it != r.notes.end()) std::printf("  adjoint variant: %s\n", it->second.c_str());
  return v;
}

// 4. Minimal p' with its certificate, bounded through the ledger K_unb.
Verdict unbalancing() {
  Verdict v;
  const SuiteReport r = suite("unbalancing", 1000);
  require_suite(v, r, 1000);
  for (const auto& c : r.ledger) v.require(c.ok, c.constant + " busted: observed " + std::to_string(c.observed));
  return v;
}

// 5. Exhaustive shift scans over Z5 and Z7 with p in {1, 2}.
Verdict drc_sifting() {
  Verdict v;
  const SuiteReport d = suite("drc-identity", 0, true);
  require_suite(v, d, *exhaustive_instances("drc-identity"));
  const SuiteReport s = suite("sifting", 0, true);
  require_suite(v, s, *exhaustive_instances("sifting"));
  const auto succ = s.observed.find("successes");
  v.require(succ != s.observed.end() && succ->second > 0, "sifting never succeeded");
  return v;
}

// 6. Smoothing subspace on the F_3^2 line and Bohr smoothing on Z101.
Verdict almost_periodicity() {
  Verdict v;
  const Group g = Group::parse("Z3^2");
  GSet line(g);
  for (std::size_t i : {0u, 1u, 2u}) line.insert(i);
  const auto sub = find_smoothing_subspace(line, line, line, 0.1, 2);
  v.require(sub.has_value() && sub->v.codim() <= 1, "no smoothing subspace of codimension <= 1 on the line");

  const fixtures::SmoothingTally t = fixtures::smoothing_tally();
  v.require(t.found + t.not_found == fixtures::kSmoothingInstances, "instance count");
  v.require(t.margins_reported, "a NotFound result carried no margin");
  const json want = fixtures::golden("smoothing_bohr_z101.json", nullptr);
  v.require(!want.is_null() && want.value("found", std::size_t{0}) == t.found,
            "success count " + std::to_string(t.found) + " differs from the golden record");
  std::printf("  find_smoothing_bohr: %zu/%zu found\n", t.found, fixtures::kSmoothingInstances);
  return v;
}

// 7. The F_3^2 driver on every nonempty subset.
Verdict density_increment() {
  Verdict v;
  const Group g = Group::parse("Z3^2");
  const double eps = 0.25;
  const Constants& k = Constants::defaults();
  std::size_t longest = 0;
  for (std::uint32_t mask = 1; mask < 512; ++mask) {
    GSet a(g);
    for (std::size_t i = 0; i < 9; ++i) {
      if (mask >> i & 1) a.insert(i);
    }
    const FfqTrace t = roth_ffq_driver(a, eps);
    const Replay r = replay_ffq(a, t);
    v.require(r.ok, "mask " + std::to_string(mask) + " replay: " + r.message);
    v.require(t.terminal == Terminal::NearUniform, "mask " + std::to_string(mask) + " ended on " + t.reason);
    const double bound = std::ceil(k.c_inc / eps * std::log(1 / a.density())) + 1;
    v.require(static_cast<double>(t.steps.size()) <= bound, "mask " + std::to_string(mask) + " trace too long");
    longest = std::max(longest, t.steps.size());
  }
  std::printf("  longest trace: %zu steps\n", longest);
  return v;
}

// 8. Bohr suites, plus regconv and fourierbohr against the ledger.
Verdict bohr_calculus() {
  Verdict v;
  for (const char* id : {"bohrsiz", "bohrreg", "bohr-ap"}) require_suite(v, suite(id, 100), 100);
  const Constants& k = Constants::defaults();
  for (const auto& [id, ledger] :
       std::vector<std::pair<std::string, double>>{{"regconv", k.k_regconv}, {"fourierbohr", k.c_cover}}) {
    require_suite(v, suite(id, 100), 100);
    const SuiteReport cal = suite(id, 100, false, true);
    const auto it = cal.empirical.find(ledger_constant(id));
    v.require(it != cal.empirical.end(), id + ": nothing measured");
    if (it == cal.empirical.end()) continue;
    const double rel = std::abs(it->second - ledger) / ledger;
    std::printf("  %s: measured %.6g, ledger %.6g\n", ledger_constant(id).c_str(), it->second, ledger);
    v.require(rel <= 0.1, id + ": measured constant differs from the ledger by " + std::to_string(rel));
  }
  return v;
}

// 9. Behrend sets, the ternary example and interval embedding.
Verdict constructions() {
  Verdict v;
  for (std::int64_t n : {100, 1000, 10000}) {
    for (auto st : {BehrendStrategy::Ternary, BehrendStrategy::Sphere}) {
      const BehrendSet b = behrend(n, st);
      v.require(count_3aps_integers(b.elements) == b.elements.size(), "behrend(" + std::to_string(n) + ") has an AP");
    }
  }
  v.require(behrend(14, BehrendStrategy::Ternary).elements == std::vector<std::int64_t>{1, 2, 4, 5, 10, 11, 13, 14},
            "ternary N = 14");
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto n = rng.between(1, 2000);
    std::vector<std::int64_t> s;
    const double density = rng.uniform(0.001, 0.05);
    for (std::int64_t x = 1; x <= n; ++x) {
      if (rng.coin(density)) s.push_back(x);
    }
    v.require(count_3aps(embed_interval(s, n).set) == count_3aps_integers(s), "embedding instance " + std::to_string(t));
  }
  return v;
}

// 10. A + A + A on Z101 at density at least 0.4.
Verdict three_sum() {
  Verdict v;
  const Group g = Group::cyclic(101);
  std::size_t ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    GSet a(g);
    while (a.density() < 0.4) a.insert(rng.below(101));
    const APReport r = three_sumset_ap_pipeline(a, 0.25);
    const std::string tag = "instance " + std::to_string(seed);
    if (r.argument_ok) {
      ++ok;
      const GSet aaa = sumset(sumset(a, a), a);
      v.require(r.verified && r.run.inside(aaa), tag + ": run not inside A + A + A");
    } else {
      v.require(!r.stage.empty() && std::isfinite(r.margin) && r.margin < 0, tag + ": failure without stage or margin");
    }
  }
  std::printf("  argument succeeded on %zu/20\n", ok);
  return v;
}

// 11. Same seed and inputs give byte-identical JSON.
Verdict reproducibility() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "km_acceptance";
  std::filesystem::create_directories(dir);
  const auto file = [&](const std::string& name, const json& j) {
    const std::string p = (dir / name).string();
    write_json_file(p, j);
    return p;
  };
  const Group z3 = Group::parse("Z3^3");
  GSet ffq(z3);
  for (std::size_t i : {0u, 1u, 3u, 4u, 9u, 10u, 12u, 13u, 26u}) ffq.insert(i);
  const std::string fset = file("ffq.json", set_to_json(ffq));
  const std::string iset = file("ints.json", integer_set_to_json({40, {1, 2, 4, 5, 10, 11, 13, 14, 28, 29}}));
  GSet z7(Group::cyclic(7));
  for (std::size_t i : {0u, 1u, 2u}) z7.insert(i);
  const std::string zset = file("z7.json", set_to_json(z7));
  const std::string bset = file("bohr.json", json::parse(R"({"group":"Z101","freqs":[[1]],"widths":[0.5]})"));

  const std::vector<std::vector<std::string>> calls = {
      {"count-aps", "--set", fset, "--dump-spectrum"},
      {"behrend", "--n", "1000", "--strategy", "sphere"},
      {"bohr", "info", "--bohr", bset},
      {"bohr", "extract-ap", "--bohr", bset},
      {"increment", "--set", fset, "--cset", fset},
      {"sift", "--set", zset, "--p", "2", "--seed", "3"},
      {"roth-ffq", "--set", fset},
      {"roth-znz", "--set", iset},
      {"three-sum", "--set", iset},
      {"verify", "holder", "--instances", "20", "--seed", "11"},
  };
  for (const auto& c : calls) {
    std::string outs[2];
    for (auto& o : outs) {
      std::vector<std::string> args = {"km"};
      args.insert(args.end(), c.begin(), c.end());
      args.push_back("--json");
      std::vector<const char*> argv;
      for (const auto& s : args) argv.push_back(s.c_str());
      std::ostringstream out, err;
      run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
      o = out.str();
    }
    v.require(!outs[0].empty() && outs[0] == outs[1], c.front() + ": output differs between runs");
    v.require(!outs[0].empty() && json::parse(outs[0]).contains("inputs_digest"), c.front() + ": no JSON envelope");
  }
  std::filesystem::remove_all(dir);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"algebra kernel", algebra},
      {"spectral facts", spectral},
      {"adjoint identity", adjoint},
      {"unbalancing", unbalancing},
      {"dependent random choice and sifting", drc_sifting},
      {"almost-periodicity oracles", almost_periodicity},
      {"density increment over F_3^2", density_increment},
      {"Bohr calculus", bohr_calculus},
      {"constructions", constructions},
      {"A + A + A pipeline", three_sum},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.ok = false;
      v.why.push_back(std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str());
    for (const auto& w : v.why) std::printf("  %s\n", w.c_str());
    std::fflush(stdout);
    failed += v.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
