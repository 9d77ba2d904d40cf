#include "km/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <ostream>

#include "km/error.hpp"
#include "km/fourier.hpp"
#include "km/io.hpp"
#include "km/pipelines.hpp"
#include "km/steps.hpp"
#include "km/verify.hpp"

namespace km {

namespace {

struct Globals {
  bool json_out = false;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  std::size_t size_cap = 0;  // 0: environment or built-in default
  std::string constants_path;
  bool dump_spectrum = false;
};

// Result of one subcommand: the results object and the exit code it implies.
struct Outcome {
  json inputs = json::object();
  json results = json::object();
  int code = 0;
  // Human mode prints this line alone when set.
  std::optional<std::string> bare;
};

std::size_t cap_of(const Globals& g) { return g.size_cap != 0 ? g.size_cap : default_size_cap(); }

// Set files come in two shapes: group sets and integer sets.
bool is_integer_set(const json& j) { return j.is_object() && j.contains("n") && !j.contains("group"); }

json spectrum_json(const GSet& a) {
  const FuncC s = dft(FuncR::indicator(a));
  json out = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back({element_to_json(a.group(), i), s[i].real(), s[i].imag()});
  }
  return out;
}

json drc_to_json(const Group& g, const DrcResult& d) {
  json shifts = json::array();
  for (auto s : d.shifts) shifts.push_back(element_to_json(g, s));
  return {{"shifts", shifts},
          {"a1", set_to_json(d.a1)},
          {"a2", set_to_json(d.a2)},
          {"f_value", d.f_value},
          {"eta", d.eta},
          {"norm_p", d.norm_p},
          {"density_product", d.density_product},
          {"density_bound", d.density_bound},
          {"scanned", d.scanned}};
}

json sift_to_json(const Group& g, const SiftResult& s) {
  return {{"drc", drc_to_json(g, s.drc)}, {"s", set_to_json(s.s)}, {"p_used", s.p_used}, {"inner_value", s.inner_value}};
}

json lift_to_json(const LiftOutcome& l) {
  json j = {{"variant", to_string(l.variant)}, {"inner_value", l.inner_value}, {"target", l.target},
            {"p_bound", l.p_bound}};
  if (l.variant == LiftVariant::Lp) {
    j["p"] = l.p;
    j["norm_value"] = l.norm_value;
  }
  return j;
}

json subspace_to_json(const SmoothingSubspace& s) {
  json checks = json::array();
  for (const auto& row : s.v.checks) checks.push_back(row);
  return {{"checks", checks},
          {"codim", s.v.codim()},
          {"base", s.base},
          {"smoothed", s.smoothed},
          {"examined", s.examined}};
}

void render_human(std::ostream& out, const std::string& command, std::uint64_t seed, const json& results) {
  out << command << "\n";
  out << "seed: " << seed << "\n";
  for (const auto& [key, v] : results.items()) {
    out << key << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Subcommands

Outcome cmd_count_aps(const Globals& g, const std::string& path) {
  Outcome o;
  const json file = read_json_file(path);
  o.inputs["set"] = file;
  if (is_integer_set(file)) {
    const IntegerSet s = integer_set_from_json(file);
    const std::uint64_t c = count_3aps_integers(s.elements);
    o.results = {{"n", s.n}, {"card", s.elements.size()}, {"count", c}, {"ap_free", c == s.elements.size()}};
    o.bare = std::to_string(c);
    return o;
  }
  const GSet a = set_from_json(file, cap_of(g));
  const std::uint64_t c = count_3aps(a);
  o.results = {{"group", a.group().to_string()}, {"card", a.card()}, {"count", c}, {"ap_free", c == a.card()}};
  if (g.dump_spectrum) o.results["spectrum"] = spectrum_json(a);
  o.bare = std::to_string(c);
  return o;
}

Outcome cmd_behrend(const Globals&, std::int64_t n, const std::string& strategy, bool verify, const std::string& out_path) {
  Outcome o;
  o.inputs = {{"n", n}, {"strategy", strategy}, {"verify", verify}};
  const BehrendSet b = behrend(n, strategy == "sphere" ? BehrendStrategy::Sphere : BehrendStrategy::Ternary);
  o.results = {{"n", b.n}, {"strategy", strategy}, {"size", b.elements.size()}, {"elements", b.elements}};
  if (b.strategy == BehrendStrategy::Sphere) {
    o.results["dim"] = b.dim;
    o.results["digits"] = b.digits;
    o.results["radius"] = b.radius;
  }
  if (verify) {
    const bool ok = is_ap_free(b.elements);
    o.results["ap_free"] = ok;
    if (!ok) o.code = 1;
  }
  const json set = integer_set_to_json(IntegerSet{b.n, b.elements});
  o.results["digest"] = digest(set);
  if (!out_path.empty()) write_json_file(out_path, set);
  return o;
}

Outcome cmd_bohr(const Globals& g, const std::string& action, const std::string& path) {
  Outcome o;
  const json file = read_json_file(path);
  o.inputs["bohr"] = file;
  BohrSet b = bohr_from_json(file, cap_of(g));
  o.results = {{"group", b.group().to_string()}, {"size", b.size()}, {"rank", b.rank()}, {"digest", digest(bohr_to_json(b))}};
  if (action == "info") {
    const Regularity r = is_regular(b);
    o.results["regular"] = r.regular;
    o.results["regularity_margin"] = r.margin;
    return o;
  }
  const ExtractedAP ap = extract_ap(b);
  o.results["run"] = {{"start", ap.run.start}, {"step", ap.run.step}, {"length", ap.run.length}};
  o.results["lemma_bound"] = ap.lemma_bound;
  if (ap.run.length < ap.lemma_bound) o.code = 1;
  return o;
}

Outcome cmd_increment(const Globals& g, const Constants& k, const std::string& set_path, const std::string& cset_path,
                      double eps, std::size_t codim_max, std::uint64_t max_scan) {
  Outcome o;
  const json fa = read_json_file(set_path), fc = read_json_file(cset_path);
  o.inputs = {{"set", fa}, {"cset", fc}, {"eps", eps}, {"codim_max", codim_max}, {"max_scan", max_scan}};
  const GSet a = set_from_json(fa, cap_of(g));
  const GSet c = set_from_json(fc, cap_of(g));
  if (g.dump_spectrum) o.results["spectrum"] = spectrum_json(a);
  IncrementConfig cfg;
  cfg.codim_max = codim_max;
  cfg.max_scan = max_scan;
  try {
    const IncrementOutcome r = density_increment_step(a, c, eps, cfg, k);
    o.results["status"] = "ok";
    o.results["variant"] = to_string(r.variant);
    o.results["alpha"] = r.alpha;
    o.results["lift"] = lift_to_json(r.lift);
    if (r.unbalanced) {
      o.results["unbalanced"] = {{"p_prime", r.unbalanced->p_prime}, {"norm", r.unbalanced->norm},
                                 {"bound", r.unbalanced->bound}};
    }
    if (r.sifted) o.results["sifted"] = sift_to_json(a.group(), *r.sifted);
    if (r.smoothing) o.results["smoothing"] = subspace_to_json(*r.smoothing);
    if (r.variant == IncrementVariant::Increment) {
      o.results["translate"] = element_to_json(a.group(), r.translate);
      o.results["new_density"] = r.new_density;
    }
  } catch (const OracleBudgetExceeded& e) {
    o.results["status"] = "budget_exceeded";
    o.results["message"] = e.what();
  } catch (const SiftExhausted& e) {
    o.results["status"] = "sift_exhausted";
    o.results["message"] = e.what();
    o.results["best_f_margin"] = e.best_f_margin;
    o.results["best_density_margin"] = e.best_density_margin;
  } catch (const ConstantBustingInstance& e) {
    o.results["status"] = "constant_busting";
    o.results["constant"] = e.constant;
    o.results["message"] = e.what();
    o.code = 1;
  }
  return o;
}

Outcome cmd_sift(const Globals& g, const std::string& set_path, const std::string& b1_path, const std::string& b2_path,
                 int p, double eps, double delta, std::uint64_t trials, bool exhaustive) {
  Outcome o;
  const json fa = read_json_file(set_path);
  o.inputs = {{"set", fa}, {"p", p}, {"eps", eps}, {"delta", delta}, {"trials", trials}, {"exhaustive", exhaustive}};
  const GSet a = set_from_json(fa, cap_of(g));
  GSet b1 = GSet::full(a.group()), b2 = GSet::full(a.group());
  if (!b1_path.empty()) {
    o.inputs["b1"] = read_json_file(b1_path);
    b1 = set_from_json(o.inputs["b1"], cap_of(g));
  }
  if (!b2_path.empty()) {
    o.inputs["b2"] = read_json_file(b2_path);
    b2 = set_from_json(o.inputs["b2"], cap_of(g));
  }
  if (g.dump_spectrum) o.results["spectrum"] = spectrum_json(a);
  ShiftSearch search;
  search.mode = exhaustive ? ShiftSearch::Exhaustive : ShiftSearch::Sampled;
  search.trials = trials;
  search.seed = g.seed;
  try {
    const SiftResult r = sift(a, b1, b2, p, eps, delta, search);
    o.results["status"] = "ok";
    o.results["sift"] = sift_to_json(a.group(), r);
  } catch (const SiftExhausted& e) {
    o.results["status"] = "exhausted";
    o.results["message"] = e.what();
    o.results["best_f_margin"] = e.best_f_margin;
    o.results["best_density_margin"] = e.best_density_margin;
  }
  return o;
}

Outcome cmd_roth_ffq(const Globals& g, const Constants& k, const std::string& set_path, double eps,
                     const FfqConfig& cfg, const std::string& trace_path, const std::string& replay_path) {
  Outcome o;
  const json fa = read_json_file(set_path);
  o.inputs = {{"set", fa}, {"eps", eps}};
  const GSet a = set_from_json(fa, cap_of(g));
  if (!replay_path.empty()) {
    const json tj = read_json_file(replay_path);
    o.inputs["trace"] = tj;
    const Replay r = replay_ffq(a, ffq_trace_from_json(tj), k);
    o.results = {{"replay_ok", r.ok}, {"message", r.message}, {"trace_digest", digest(tj)}};
    o.code = r.ok ? 0 : 1;
    return o;
  }
  o.inputs["config"] = {{"codim_max", cfg.codim_max}, {"max_scan", cfg.max_scan}, {"max_steps", cfg.max_steps}};
  const FfqTrace t = roth_ffq_driver(a, eps, cfg, k);
  const json tj = ffq_trace_to_json(t);
  o.results = {{"trace", tj}, {"trace_digest", digest(tj)}, {"steps", t.steps.size()},
               {"terminal", to_string(t.terminal)}};
  if (g.dump_spectrum) o.results["spectrum"] = spectrum_json(a);
  if (!trace_path.empty()) write_json_file(trace_path, tj);
  return o;
}

// Cyclic input for the Z/NZ driver: a group set, or an integer set embedded
// the same way the driver embeds it.
GSet znz_input(const json& file, const Globals& g, ZnzMode mode) {
  if (!is_integer_set(file)) return set_from_json(file, cap_of(g));
  const IntegerSet s = integer_set_from_json(file);
  std::int64_t m = 3 * s.n + 1;
  if (mode == ZnzMode::ThreeAP && m % 2 == 0) ++m;
  GSet a(Group(std::vector<std::uint32_t>{static_cast<std::uint32_t>(m)}, cap_of(g)));
  for (auto x : s.elements) a.insert(static_cast<std::size_t>(x));
  return a;
}

Outcome cmd_roth_znz(const Globals& g, const Constants& k, const std::string& set_path, double eps,
                     const ZnzConfig& cfg, const std::string& trace_path, const std::string& replay_path) {
  Outcome o;
  const json fa = read_json_file(set_path);
  o.inputs = {{"set", fa}, {"eps", eps}};
  const GSet a = znz_input(fa, g, cfg.mode);
  if (!replay_path.empty()) {
    const json tj = read_json_file(replay_path);
    o.inputs["trace"] = tj;
    const Replay r = replay_znz(a, znz_trace_from_json(tj), k);
    o.results = {{"replay_ok", r.ok}, {"message", r.message}, {"trace_digest", digest(tj)}};
    o.code = r.ok ? 0 : 1;
    return o;
  }
  o.inputs["config"] = {{"max_steps", cfg.max_steps}, {"max_scan", cfg.max_scan}};
  const ZnzTrace t = znz_driver(a, eps, cfg, k);
  const json tj = znz_trace_to_json(t);
  o.results = {{"trace", tj}, {"trace_digest", digest(tj)}, {"steps", t.steps.size()},
               {"terminal", to_string(t.terminal)}};
  if (!trace_path.empty()) write_json_file(trace_path, tj);
  return o;
}

Outcome cmd_three_sum(const Globals& g, const Constants& k, const std::string& set_path, std::int64_t n, double eps,
                      const ZnzConfig& cfg) {
  Outcome o;
  const json fa = read_json_file(set_path);
  o.inputs = {{"set", fa}, {"n", n}, {"eps", eps}, {"config", {{"max_steps", cfg.max_steps}, {"max_scan", cfg.max_scan}}}};
  APReport r;
  if (is_integer_set(fa)) {
    const IntegerSet s = integer_set_from_json(fa);
    r = three_sumset_ap_pipeline(s.elements, n > 0 ? n : s.n, eps, cfg, k);
  } else {
    const GSet a = set_from_json(fa, cap_of(g));
    if (n > 0 && static_cast<std::size_t>(n) != a.group().size()) {
      throw DomainError("--n does not match the group of the set file");
    }
    r = three_sumset_ap_pipeline(a, eps, cfg, k);
  }
  o.results = ap_report_to_json(r);
  o.code = r.verified ? 0 : 1;
  return o;
}

struct VerifyArgs {
  std::string suite;
  std::size_t instances = 0;
  bool exhaustive = false;
  bool calibrate = false;
  std::optional<std::size_t> index;
  std::string ledger_out;
};

Outcome cmd_verify(const Globals& g, const Constants& k, const VerifyArgs& v) {
  Outcome o;
  o.inputs = {{"suite", v.suite}, {"instances", v.instances}, {"exhaustive", v.exhaustive}, {"calibrate", v.calibrate}};
  if (!has_suite(v.suite)) throw DomainError("unknown suite '" + v.suite + "'");
  if (v.index) {
    o.inputs["index"] = *v.index;
    const InstanceResult r = run_instance(v.suite, g.seed, *v.index, v.exhaustive, k);
    o.results = {{"suite", v.suite},         {"index", *v.index},     {"discarded", r.discarded},
                 {"regenerated", r.regenerated}, {"failed", r.failed}, {"message", r.message},
                 {"margin", std::isfinite(r.margin) ? json(r.margin) : json(nullptr)},
                 {"payload", r.payload},     {"observed", r.observed}};
    o.code = r.failed ? 1 : 0;
    return o;
  }
  SuiteSpec spec;
  spec.suite_id = v.suite;
  spec.instances = v.instances;
  spec.seed = g.seed;
  spec.exhaustive = v.exhaustive;
  spec.calibrate = v.calibrate;
  spec.threads = g.threads;
  const SuiteReport rep = run_suite(spec, k);
  o.results = report_to_json(rep);
  if (v.calibrate && !v.ledger_out.empty()) write_calibration(v.ledger_out, rep, k);
  o.code = rep.passed() ? 0 : 1;
  return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Executable density-increment machinery for three-term progressions", "km"};
  app.require_subcommand(1);
  Globals g;
  auto add_globals = [&](CLI::App* a) {
    a->add_flag("--json", g.json_out, "Emit one JSON object");
    a->add_option("--seed", g.seed, "Seed for every randomized choice");
    a->add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");
    a->add_option("--size-cap", g.size_cap, "Largest group order accepted")->check(CLI::PositiveNumber);
    a->add_option("--constants", g.constants_path, "Constants ledger file");
    a->add_flag("--dump-spectrum", g.dump_spectrum, "Include the Fourier spectrum of the input set");
  };

  std::function<Outcome(const Constants&)> action;

  std::string set_path, cset_path, trace_path, replay_path, b1_path, b2_path, bohr_path;
  double eps = 0.25, delta = 0.25;
  int p = 2;
  std::int64_t n = 0;
  std::uint64_t trials = 10000;
  bool exhaustive_search = false;

  auto* count = app.add_subcommand("count-aps", "Ordered 3-AP count of a set");
  add_globals(count);
  count->add_option("--set", set_path, "Set file")->required()->check(CLI::ExistingFile);
  count->callback([&] { action = [&](const Constants&) { return cmd_count_aps(g, set_path); }; });

  std::string strategy = "sphere";
  bool verify_free = false;
  std::string out_path;
  auto* beh = app.add_subcommand("behrend", "Progression-free subset of [1, n]");
  add_globals(beh);
  beh->add_option("--n", n, "Interval length")->required()->check(CLI::PositiveNumber);
  beh->add_option("--strategy", strategy, "ternary or sphere")->check(CLI::IsMember({"ternary", "sphere"}));
  beh->add_flag("--verify", verify_free, "Check AP-freeness exhaustively");
  beh->add_option("--out", out_path, "Write the set file here");
  beh->callback([&] { action = [&](const Constants&) { return cmd_behrend(g, n, strategy, verify_free, out_path); }; });

  auto* bohr = app.add_subcommand("bohr", "Bohr set queries");
  bohr->require_subcommand(1);
  for (const char* name : {"info", "extract-ap"}) {
    auto* sub = bohr->add_subcommand(name, name == std::string("info") ? "Size, rank and regularity"
                                                                        : "Long progression inside the set");
    add_globals(sub);
    sub->add_option("--bohr", bohr_path, "Bohr set file")->required()->check(CLI::ExistingFile);
    const std::string act = name;
    sub->callback([&, act] { action = [&, act](const Constants&) { return cmd_bohr(g, act, bohr_path); }; });
  }

  std::size_t codim_max = 4;
  std::uint64_t max_scan = 1u << 18;
  auto* inc = app.add_subcommand("increment", "One density-increment step over F_q^n");
  add_globals(inc);
  inc->add_option("--set", set_path, "Set A")->required()->check(CLI::ExistingFile);
  inc->add_option("--cset", cset_path, "Set C")->required()->check(CLI::ExistingFile);
  inc->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
  inc->add_option("--codim-max", codim_max)->check(CLI::PositiveNumber);
  inc->add_option("--max-scan", max_scan)->check(CLI::PositiveNumber);
  inc->callback([&] {
    action = [&](const Constants& k) { return cmd_increment(g, k, set_path, cset_path, eps, codim_max, max_scan); };
  });

  auto* sf = app.add_subcommand("sift", "Dependent random choice and sifting");
  add_globals(sf);
  sf->add_option("--set", set_path, "Set A")->required()->check(CLI::ExistingFile);
  sf->add_option("--b1", b1_path, "Set B1 (default G)")->check(CLI::ExistingFile);
  sf->add_option("--b2", b2_path, "Set B2 (default G)")->check(CLI::ExistingFile);
  sf->add_option("--p", p)->check(CLI::PositiveNumber);
  sf->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
  sf->add_option("--delta", delta)->check(CLI::Range(0.0, 1.0));
  sf->add_option("--trials", trials)->check(CLI::PositiveNumber);
  sf->add_flag("--exhaustive", exhaustive_search, "Scan all of G^p instead of sampling");
  sf->callback([&] {
    action = [&](const Constants&) {
      return cmd_sift(g, set_path, b1_path, b2_path, p, eps, delta, trials, exhaustive_search);
    };
  });

  FfqConfig ffq;
  auto* rf = app.add_subcommand("roth-ffq", "Density-increment driver over F_q^n");
  add_globals(rf);
  rf->add_option("--set", set_path, "Set A")->required()->check(CLI::ExistingFile);
  rf->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
  rf->add_option("--codim-max", ffq.codim_max)->check(CLI::PositiveNumber);
  rf->add_option("--max-scan", ffq.max_scan)->check(CLI::PositiveNumber);
  rf->add_option("--max-steps", ffq.max_steps)->check(CLI::PositiveNumber);
  rf->add_option("--trace", trace_path, "Write the trace here");
  rf->add_option("--replay", replay_path, "Replay this trace instead of running")->check(CLI::ExistingFile);
  rf->callback([&] {
    action = [&](const Constants& k) { return cmd_roth_ffq(g, k, set_path, eps, ffq, trace_path, replay_path); };
  });

  ZnzConfig znz;
  auto* rz = app.add_subcommand("roth-znz", "Density-increment driver over Z/NZ with Bohr cells");
  add_globals(rz);
  rz->add_option("--set", set_path, "Set A (group set on Z_N or integer set)")->required()->check(CLI::ExistingFile);
  rz->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
  rz->add_option("--max-steps", znz.max_steps)->check(CLI::PositiveNumber);
  rz->add_option("--max-scan", znz.max_scan)->check(CLI::PositiveNumber);
  rz->add_option("--trace", trace_path, "Write the trace here");
  rz->add_option("--replay", replay_path, "Replay this trace instead of running")->check(CLI::ExistingFile);
  rz->callback([&] {
    action = [&](const Constants& k) { return cmd_roth_znz(g, k, set_path, eps, znz, trace_path, replay_path); };
  });

  ZnzConfig ts;
  ts.mode = ZnzMode::Sumset;
  auto* three = app.add_subcommand("three-sum", "Long progression inside A + A + A");
  add_globals(three);
  three->add_option("--set", set_path, "Set A")->required()->check(CLI::ExistingFile);
  three->add_option("--n", n, "Modulus or interval length")->check(CLI::PositiveNumber);
  three->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
  three->add_option("--max-steps", ts.max_steps)->check(CLI::PositiveNumber);
  three->add_option("--max-scan", ts.max_scan)->check(CLI::PositiveNumber);
  three->callback([&] { action = [&](const Constants& k) { return cmd_three_sum(g, k, set_path, n, eps, ts); }; });

  VerifyArgs va;
  std::size_t index = 0;
  auto* ver = app.add_subcommand("verify", "Run a lemma suite");
  add_globals(ver);
  ver->add_option("suite", va.suite, "Suite id")->required();
  ver->add_option("--instances", va.instances, "Instance count (default: suite default)");
  ver->add_flag("--exhaustive", va.exhaustive, "Enumerate all small instances");
  ver->add_flag("--calibrate", va.calibrate, "Measure ledger constants instead of asserting them");
  auto* idx = ver->add_option("--index", index, "Re-run one instance");
  ver->add_option("--ledger-out", va.ledger_out, "With --calibrate, write measured constants to this ledger");
  ver->callback([&] {
    if (idx->count() > 0) va.index = index;
    action = [&](const Constants& k) { return cmd_verify(g, k, va); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  std::string command;
  for (const CLI::App* a = &app; !a->get_subcommands().empty();) {
    a = a->get_subcommands().front();
    command += (command.empty() ? "" : " ") + a->get_name();
  }

  try {
    const Constants k = Constants::load(g.constants_path.empty() ? Constants::default_path() : g.constants_path);
    Outcome o = action(k);
    json env;
    env["schema_version"] = kSchemaVersion;
    env["command"] = command;
    env["seed"] = g.seed;
    env["constants"] = k.to_json();
    env["inputs_digest"] = digest(json{{"command", command}, {"seed", g.seed}, {"inputs", o.inputs}});
    env["results"] = o.results;
    if (g.json_out) {
      out << env.dump(2) << "\n";
    } else if (o.bare) {
      out << *o.bare << "\n";
    } else {
      render_human(out, command, g.seed, o.results);
    }
    return o.code;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisViolation& e) {
    err << "error: hypothesis not met: " << e.what() << "\n";
    return 2;
  } catch (const GroupMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace km
