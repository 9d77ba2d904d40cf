#include "km/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "km/error.hpp"

namespace km {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw InternalError("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string canonical(const json& j) { return j.dump(); }
std::string digest(const json& j) { return sha256_hex(canonical(j)); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << canonical(j) << '\n';
}

namespace {

template <class T>
T get_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

const json& get_array(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(std::string("field '") + key + "' must be an array");
  }
  return j.at(key);
}

json matrix_to_json(const std::vector<std::vector<std::uint32_t>>& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

std::vector<std::vector<std::uint32_t>> matrix_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("matrix must be an array of rows");
  std::vector<std::vector<std::uint32_t>> m;
  for (const auto& row : j) {
    try {
      m.push_back(row.get<std::vector<std::uint32_t>>());
    } catch (const json::exception& e) {
      throw ParseError(std::string("matrix row: ") + e.what());
    }
  }
  return m;
}

}  // namespace

json element_to_json(const Group& g, std::size_t index) { return g.element(index).coords; }

std::size_t element_from_json(const Group& g, const json& j) {
  if (!j.is_array()) throw ParseError("element must be an array of residues");
  std::vector<std::uint32_t> coords;
  for (const auto& c : j) {
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0)) {
      throw ParseError("element residues must be nonnegative integers");
    }
    const auto v = c.get<std::uint64_t>();
    if (v > 0xffffffffULL) throw ParseError("element residue out of range");
    coords.push_back(static_cast<std::uint32_t>(v));
  }
  if (coords.size() != g.rank()) throw ParseError("element length does not match group rank");
  try {
    return g.index(Element{coords});
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

json set_to_json(const GSet& a) {
  json elems = json::array();
  for (auto i : a.indices()) elems.push_back(element_to_json(a.group(), i));
  return {{"group", a.group().to_string()}, {"elements", elems}};
}

GSet set_from_json(const json& j, std::size_t cap) {
  const Group g = Group::parse(get_field<std::string>(j, "group"), cap);
  GSet a(g);
  for (const auto& e : get_array(j, "elements")) {
    const std::size_t i = element_from_json(g, e);
    if (a.contains(i)) throw ParseError("duplicate element in set");
    a.insert(i);
  }
  return a;
}

json integer_set_to_json(const IntegerSet& s) { return {{"n", s.n}, {"elements", s.elements}}; }

IntegerSet integer_set_from_json(const json& j) {
  IntegerSet s;
  s.n = get_field<std::int64_t>(j, "n");
  if (s.n < 1) throw ParseError("integer set needs n >= 1");
  s.elements = get_field<std::vector<std::int64_t>>(j, "elements");
  std::sort(s.elements.begin(), s.elements.end());
  if (std::adjacent_find(s.elements.begin(), s.elements.end()) != s.elements.end()) {
    throw ParseError("duplicate element in integer set");
  }
  for (auto x : s.elements) {
    if (x < 1 || x > s.n) throw ParseError("integer set element " + std::to_string(x) + " outside [1, n]");
  }
  return s;
}

json bohr_to_json(const BohrSet& b) {
  json freqs = json::array();
  for (auto f : b.freqs()) freqs.push_back(element_to_json(b.group(), f));
  return {{"group", b.group().to_string()}, {"freqs", freqs}, {"widths", b.widths()}};
}

BohrSet bohr_from_json(const json& j, std::size_t cap) {
  const Group g = Group::parse(get_field<std::string>(j, "group"), cap);
  std::vector<std::size_t> freqs;
  for (const auto& f : get_array(j, "freqs")) freqs.push_back(element_from_json(g, f));
  const auto widths = get_field<std::vector<double>>(j, "widths");
  try {
    return bohr_build(g, std::move(freqs), widths);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

json ap_to_json(const Group& g, const APRun& run) {
  return {{"start", element_to_json(g, run.start)}, {"step", element_to_json(g, run.step)}, {"length", run.length}};
}

// ---------------------------------------------------------------------------
// Traces

json ffq_step_to_json(const FfqStep& s, bool with_certificate) {
  json j = {{"dim", s.dim},         {"checks", matrix_to_json(s.checks)},
            {"translate", s.translate}, {"count", s.count},
            {"v_size", s.v_size},   {"alpha", s.alpha},
            {"density", s.density}, {"p", s.p},
            {"p_prime", s.p_prime}, {"p_used", s.p_used}};
  if (with_certificate) j["certificate"] = s.certificate;
  return j;
}

json ffq_trace_to_json(const FfqTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(ffq_step_to_json(s));
  return {{"kind", "ffq"},
          {"group", t.group.to_string()},
          {"eps", t.eps},
          {"config", {{"codim_max", t.config.codim_max}, {"max_scan", t.config.max_scan}, {"max_steps", t.config.max_steps}}},
          {"steps", steps},
          {"terminal",
           {{"kind", to_string(t.terminal)},
            {"reason", t.reason},
            {"margin", t.margin},
            {"origin", t.origin},
            {"basis", matrix_to_json(t.basis)},
            {"count", t.final_count},
            {"density", t.final_density},
            {"count_3aps", t.final_3aps},
            {"inner_value", t.inner_value}}}};
}

FfqTrace ffq_trace_from_json(const json& j) {
  if (get_field<std::string>(j, "kind") != "ffq") throw ParseError("not an ffq trace");
  FfqTrace t;
  t.group = Group::parse(get_field<std::string>(j, "group"));
  t.eps = get_field<double>(j, "eps");
  const json& cfg = j.at("config");
  t.config.codim_max = get_field<std::size_t>(cfg, "codim_max");
  t.config.max_scan = get_field<std::uint64_t>(cfg, "max_scan");
  t.config.max_steps = get_field<std::size_t>(cfg, "max_steps");
  for (const auto& s : get_array(j, "steps")) {
    FfqStep st;
    st.dim = get_field<std::size_t>(s, "dim");
    st.checks = matrix_from_json(s.at("checks"));
    st.translate = get_field<std::vector<std::uint32_t>>(s, "translate");
    st.count = get_field<std::size_t>(s, "count");
    st.v_size = get_field<std::size_t>(s, "v_size");
    st.alpha = get_field<double>(s, "alpha");
    st.density = get_field<double>(s, "density");
    st.p = get_field<int>(s, "p");
    st.p_prime = get_field<int>(s, "p_prime");
    st.p_used = get_field<int>(s, "p_used");
    st.certificate = get_field<std::string>(s, "certificate");
    t.steps.push_back(std::move(st));
  }
  const json& term = j.at("terminal");
  const auto kind = get_field<std::string>(term, "kind");
  if (kind != "NearUniform" && kind != "BudgetExceeded") throw ParseError("unknown terminal " + kind);
  t.terminal = kind == "NearUniform" ? Terminal::NearUniform : Terminal::BudgetExceeded;
  t.reason = get_field<std::string>(term, "reason");
  t.margin = get_field<double>(term, "margin");
  t.origin = get_field<std::vector<std::uint32_t>>(term, "origin");
  t.basis = matrix_from_json(term.at("basis"));
  t.final_count = get_field<std::size_t>(term, "count");
  t.final_density = get_field<double>(term, "density");
  t.final_3aps = get_field<std::uint64_t>(term, "count_3aps");
  t.inner_value = get_field<double>(term, "inner_value");
  return t;
}

json znz_step_to_json(const ZnzStep& s, bool with_certificate) {
  json j = {{"kind", s.kind},      {"cell", bohr_to_json(s.cell)}, {"shift", s.shift},
            {"count", s.count},    {"alpha", s.alpha},             {"density", s.density},
            {"p", s.p},            {"p_prime", s.p_prime},         {"p_used", s.p_used}};
  if (with_certificate) j["certificate"] = s.certificate;
  return j;
}

namespace {

const char* mode_name(ZnzMode m) { return m == ZnzMode::ThreeAP ? "three-ap" : "sumset"; }

json optional_bohr(const BohrSet& b) { return b.freqs().empty() ? json(nullptr) : bohr_to_json(b); }

BohrSet optional_bohr_from(const json& j) { return j.is_null() ? BohrSet() : bohr_from_json(j); }

}  // namespace

json znz_trace_to_json(const ZnzTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(znz_step_to_json(s));
  return {{"kind", "znz"},
          {"group", t.group.to_string()},
          {"mode", mode_name(t.mode)},
          {"eps", t.eps},
          {"config",
           {{"max_steps", t.config.max_steps},
            {"max_scan", t.config.max_scan},
            {"smoothing_freqs", t.config.smoothing.freqs},
            {"smoothing_widths", t.config.smoothing.widths},
            {"smoothing_min_size", t.config.smoothing.min_size}}},
          {"steps", steps},
          {"count_3aps", t.count_3aps},
          {"terminal",
           {{"kind", to_string(t.terminal)},
            {"reason", t.reason},
            {"margin", t.margin},
            {"cell", bohr_to_json(t.cell)},
            {"cell_size", t.cell.size()},
            {"total_shift", t.total_shift},
            {"count", t.cell_count},
            {"alpha", t.alpha},
            {"bp", optional_bohr(t.bp)},
            {"bpp", optional_bohr(t.bpp)},
            {"x", t.x},
            {"inner_value", t.inner_value},
            {"target", t.target}}}};
}

ZnzTrace znz_trace_from_json(const json& j) {
  if (get_field<std::string>(j, "kind") != "znz") throw ParseError("not a znz trace");
  ZnzTrace t;
  t.group = Group::parse(get_field<std::string>(j, "group"));
  const auto mode = get_field<std::string>(j, "mode");
  if (mode != "three-ap" && mode != "sumset") throw ParseError("unknown mode " + mode);
  t.mode = mode == "three-ap" ? ZnzMode::ThreeAP : ZnzMode::Sumset;
  t.eps = get_field<double>(j, "eps");
  const json& cfg = j.at("config");
  t.config.mode = t.mode;
  t.config.max_steps = get_field<std::size_t>(cfg, "max_steps");
  t.config.max_scan = get_field<std::uint64_t>(cfg, "max_scan");
  t.config.smoothing.freqs = get_field<std::size_t>(cfg, "smoothing_freqs");
  t.config.smoothing.widths = get_field<std::size_t>(cfg, "smoothing_widths");
  t.config.smoothing.min_size = get_field<std::size_t>(cfg, "smoothing_min_size");
  for (const auto& s : get_array(j, "steps")) {
    ZnzStep st;
    st.kind = get_field<std::string>(s, "kind");
    st.cell = bohr_from_json(s.at("cell"));
    st.shift = get_field<std::size_t>(s, "shift");
    st.count = get_field<std::size_t>(s, "count");
    st.alpha = get_field<double>(s, "alpha");
    st.density = get_field<double>(s, "density");
    st.p = get_field<int>(s, "p");
    st.p_prime = get_field<int>(s, "p_prime");
    st.p_used = get_field<int>(s, "p_used");
    st.certificate = get_field<std::string>(s, "certificate");
    t.steps.push_back(std::move(st));
  }
  t.count_3aps = get_field<std::uint64_t>(j, "count_3aps");
  const json& term = j.at("terminal");
  const auto kind = get_field<std::string>(term, "kind");
  if (kind != "NearUniform" && kind != "BudgetExceeded") throw ParseError("unknown terminal " + kind);
  t.terminal = kind == "NearUniform" ? Terminal::NearUniform : Terminal::BudgetExceeded;
  t.reason = get_field<std::string>(term, "reason");
  t.margin = get_field<double>(term, "margin");
  t.cell = bohr_from_json(term.at("cell"));
  t.total_shift = get_field<std::size_t>(term, "total_shift");
  t.cell_count = get_field<std::size_t>(term, "count");
  t.alpha = get_field<double>(term, "alpha");
  t.bp = optional_bohr_from(term.at("bp"));
  t.bpp = optional_bohr_from(term.at("bpp"));
  t.x = get_field<std::size_t>(term, "x");
  t.inner_value = get_field<double>(term, "inner_value");
  t.target = get_field<double>(term, "target");
  return t;
}

json ap_report_to_json(const APReport& r) {
  const Group& g = r.trace.group;
  json j = {{"trace", znz_trace_to_json(r.trace)},
            {"argument_ok", r.argument_ok},
            {"stage", r.stage},
            {"margin", r.margin},
            {"verified", r.verified},
            {"direct", ap_to_json(g, r.direct)}};
  if (r.argument_ok || r.covered > 0) {
    j["rho"] = r.rho;
    j["b2"] = optional_bohr(r.b2);
    j["b2_size"] = r.b2.freqs().empty() ? 0 : r.b2.size();
    j["covered"] = r.covered;
  }
  if (r.argument_ok) {
    j["run"] = ap_to_json(g, r.run);
    j["lemma_bound"] = r.lemma_bound;
  }
  return j;
}

}  // namespace km
