#include "km/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "km/error.hpp"
#include "km/io.hpp"
#include "suite_registry.hpp"

namespace km {

namespace {

constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

const suites::Suite& find_suite(const std::string& id) {
  for (const auto& s : suites::registry()) {
    if (s.id == id) return s;
  }
  throw DomainError("unknown suite '" + id + "'");
}

std::size_t instance_count(const suites::Suite& s, const SuiteSpec& spec) {
  if (spec.exhaustive) {
    if (s.exhaustive_count == 0) throw DomainError("suite '" + s.id + "' has no exhaustive mode");
    return s.exhaustive_count;
  }
  return spec.instances == 0 ? s.default_instances : spec.instances;
}

InstanceResult guarded(const suites::Suite& s, std::size_t index, std::uint64_t seed, const suites::Context& ctx) {
  Rng rng = Rng::derive(seed, index);
  try {
    return s.run(index, rng, ctx);
  } catch (const std::exception& e) {
    InstanceResult r;
    r.failed = true;
    r.margin = -1.0;
    r.message = std::string("unexpected exception: ") + e.what();
    return r;
  }
}

double ledger_value(const Constants& k, const std::string& field) {
  const json j = k.to_json();
  if (!j.contains(field)) throw InternalError("no ledger field " + field);
  return j.at(field).get<double>();
}

}  // namespace

bool SuiteReport::passed() const {
  if (!failures.empty()) return false;
  return std::all_of(ledger.begin(), ledger.end(), [](const LedgerCheck& c) { return c.ok; });
}

std::vector<std::string> suite_ids() {
  std::vector<std::string> out;
  for (const auto& s : suites::registry()) out.push_back(s.id);
  return out;
}

bool has_suite(const std::string& id) {
  const auto& r = suites::registry();
  return std::any_of(r.begin(), r.end(), [&](const suites::Suite& s) { return s.id == id; });
}

std::size_t default_instances(const std::string& id) { return find_suite(id).default_instances; }

std::optional<std::size_t> exhaustive_instances(const std::string& id) {
  const auto& s = find_suite(id);
  if (s.exhaustive_count == 0) return std::nullopt;
  return s.exhaustive_count;
}

std::string ledger_constant(const std::string& suite_id) { return find_suite(suite_id).ledger_field; }

InstanceResult run_instance(const std::string& suite_id, std::uint64_t seed, std::size_t index, bool exhaustive,
                            const Constants& k) {
  const auto& s = find_suite(suite_id);
  if (exhaustive && index >= s.exhaustive_count) throw DomainError("instance index out of range");
  const suites::Context ctx{k, exhaustive, false};
  return guarded(s, index, seed, ctx);
}

SuiteReport run_suite(const SuiteSpec& spec, const Constants& k) {
  const auto& s = find_suite(spec.suite_id);
  const std::size_t n = instance_count(s, spec);
  const auto t0 = std::chrono::steady_clock::now();

  SuiteReport rep;
  rep.suite_id = s.id;
  rep.seed = spec.seed;
  rep.exhaustive = spec.exhaustive;
  rep.calibrate = spec.calibrate;

  if (s.prelude) {
    suites::Prelude p = s.prelude(k);
    rep.notes = p.notes;
    if (!p.ok) rep.failures.push_back({kNoIndex, p.message, -1.0, json{{"suite", s.id}, {"prelude", true}}});
  }

  const suites::Context ctx{k, spec.exhaustive, spec.calibrate};
  std::vector<InstanceResult> results(n);
  unsigned threads = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = guarded(s, i, spec.seed, ctx);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const InstanceResult& r = results[i];
    rep.regenerated += r.regenerated;
    if (r.discarded) {
      ++rep.discarded;
      continue;
    }
    ++rep.instances;
    min_margin = std::min(min_margin, r.margin);
    if (r.failed) {
      json payload = r.payload.is_null() ? json::object() : r.payload;
      payload["suite"] = s.id;
      payload["seed"] = spec.seed;
      payload["index"] = i;
      payload["exhaustive"] = spec.exhaustive;
      rep.failures.push_back({i, r.message, r.margin, std::move(payload)});
    }
    for (const auto& [key, v] : r.observed) {
      const auto it = s.aggregate.find(key);
      const suites::Agg agg = it == s.aggregate.end() ? suites::Agg::Max : it->second;
      auto slot = rep.observed.find(key);
      if (slot == rep.observed.end()) {
        rep.observed.emplace(key, v);
      } else if (agg == suites::Agg::Max) {
        slot->second = std::max(slot->second, v);
      } else if (agg == suites::Agg::Min) {
        slot->second = std::min(slot->second, v);
      } else {
        slot->second += v;
      }
    }
  }
  rep.min_margin = min_margin;

  if (!s.ledger_key.empty()) {
    const auto it = rep.observed.find(s.ledger_key);
    if (it != rep.observed.end()) {
      rep.empirical[s.ledger_field] = it->second;
      if (!spec.calibrate) {
        const double led = ledger_value(k, s.ledger_field);
        const bool ok = s.ledger_upper ? it->second <= led * (1 + 1e-9) : it->second >= led * (1 - 1e-9);
        rep.ledger.push_back({s.ledger_field, it->second, led, ok});
      }
    }
  }
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

json report_to_json(const SuiteReport& r) {
  json j;
  j["suite"] = r.suite_id;
  j["seed"] = r.seed;
  j["exhaustive"] = r.exhaustive;
  j["calibrate"] = r.calibrate;
  j["instances"] = r.instances;
  j["discarded"] = r.discarded;
  j["regenerated"] = r.regenerated;
  j["passed"] = r.passed();
  j["min_margin"] = std::isfinite(r.min_margin) ? json(r.min_margin) : json(nullptr);
  json fails = json::array();
  for (const auto& f : r.failures) {
    fails.push_back({{"index", f.index == kNoIndex ? json(nullptr) : json(f.index)},
                     {"message", f.message},
                     {"margin", f.margin},
                     {"payload", f.payload}});
  }
  j["failures"] = fails;
  j["empirical_constants"] = r.empirical;
  j["observed"] = r.observed;
  j["notes"] = r.notes;
  json led = json::array();
  for (const auto& c : r.ledger) {
    led.push_back({{"constant", c.constant}, {"observed", c.observed}, {"ledger", c.ledger}, {"ok", c.ok}});
  }
  j["ledger"] = led;
  return j;
}

void write_calibration(const std::string& path, const SuiteReport& r, const Constants& current) {
  json file = json::object();
  if (std::filesystem::exists(path)) file = read_json_file(path);
  if (!file.is_object()) file = json::object();
  Constants updated = current;
  json cj = updated.to_json();
  for (const auto& [field, v] : r.empirical) {
    cj[field] = v;
    file["calibration"][field] = {{"suite", r.suite_id}, {"seed", r.seed}, {"instances", r.instances}, {"value", v}};
  }
  file["constants"] = cj;
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write ledger " + path);
  out << file.dump(2) << "\n";
}

}  // namespace km
