#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "km/cli.hpp"
#include "km/io.hpp"
#include "oracles.hpp"

using namespace km;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "km");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const json& j) {
  const auto path = (std::filesystem::temp_directory_path() / name).string();
  write_json_file(path, j);
  return path;
}

}  // namespace

TEST_CASE("count-aps") {
  const std::string set = temp_file("km_cli_z5.json", set_to_json(oracle::cyclic_set(5, {0, 1, 2})));
  const Run r = run({"count-aps", "--set", set});
  CHECK(r.code == 0);
  CHECK(r.out == "5\n");

  const Run j = run({"count-aps", "--set", set, "--json"});
  CHECK(j.code == 0);
  const json doc = json::parse(j.out);
  CHECK(doc["schema_version"] == kSchemaVersion);
  CHECK(doc["command"] == "count-aps");
  CHECK(doc["results"]["count"] == 5);
  CHECK(doc.contains("constants"));
  CHECK(doc["inputs_digest"].get<std::string>().size() == 64);

  const std::string ints = temp_file("km_cli_int.json", integer_set_to_json({5, {1, 3, 5}}));
  CHECK(run({"count-aps", "--set", ints}).out == "5\n");
}

TEST_CASE("usage and input errors exit with 2") {
  CHECK(run({"behrend", "--n", "0"}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"verify", "no-such-suite"}).code == 2);
  const std::string bad = temp_file("km_cli_bad.json", json::parse(R"({"group":"Z5","elements":[[1,2]]})"));
  CHECK(run({"count-aps", "--set", bad}).code == 2);
}

TEST_CASE("behrend output files are digest-stable") {
  const auto path = (std::filesystem::temp_directory_path() / "km_cli_behrend.json").string();
  const Run r = run({"behrend", "--n", "1000", "--strategy", "sphere", "--verify", "--out", path, "--json"});
  CHECK(r.code == 0);
  const json doc = json::parse(r.out);
  const IntegerSet s = integer_set_from_json(read_json_file(path));
  CHECK(s.n == 1000);
  CHECK(doc["results"]["size"] == s.elements.size());
  CHECK(digest(integer_set_to_json(s)) == digest(read_json_file(path)));
}

TEST_CASE("verify emits a report and reruns are byte-identical") {
  const Run a = run({"verify", "bohrsiz", "--instances", "10", "--seed", "7", "--json"});
  CHECK(a.code == 0);
  const json doc = json::parse(a.out);
  CHECK(doc["command"] == "verify");
  CHECK(doc["seed"] == 7);
  CHECK(doc["results"]["failures"].empty());
  const Run b = run({"verify", "bohrsiz", "--instances", "10", "--seed", "7", "--json"});
  CHECK(a.out == b.out);
}

TEST_CASE("driver traces replay through the CLI") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string set = temp_file("km_cli_znz.json", integer_set_to_json({40, {1, 2, 4, 5, 10, 11, 13, 14, 28, 29}}));
  const std::string trace = (dir / "km_cli_znz_trace.json").string();
  const Run r = run({"roth-znz", "--set", set, "--trace", trace, "--json"});
  CHECK(r.code == 0);
  const Run back = run({"roth-znz", "--set", set, "--replay", trace, "--json"});
  CHECK(back.code == 0);
  CHECK(json::parse(back.out)["results"]["replay_ok"] == true);

  const Group g = Group::parse("Z3^3");
  GSet a(g);
  for (std::size_t i : {0u, 1u, 3u, 4u, 9u, 10u, 12u, 13u, 26u}) a.insert(i);
  const std::string fset = temp_file("km_cli_ffq.json", set_to_json(a));
  const std::string ftrace = (dir / "km_cli_ffq_trace.json").string();
  CHECK(run({"roth-ffq", "--set", fset, "--trace", ftrace}).code == 0);
  const Run fb = run({"roth-ffq", "--set", fset, "--replay", ftrace, "--json"});
  CHECK(fb.code == 0);
  CHECK(json::parse(fb.out)["results"]["replay_ok"] == true);

  // A tampered trace fails replay with exit code 1.
  json t = read_json_file(ftrace);
  t["terminal"]["count"] = t["terminal"]["count"].get<std::size_t>() + 1;
  write_json_file(ftrace, t);
  CHECK(run({"roth-ffq", "--set", fset, "--replay", ftrace}).code == 1);
}

TEST_CASE("bohr queries") {
  const std::string b = temp_file("km_cli_bohr.json", json::parse(R"({"group":"Z101","freqs":[[1]],"widths":[0.5]})"));
  const Run info = run({"bohr", "info", "--bohr", b, "--json"});
  CHECK(info.code == 0);
  CHECK(json::parse(info.out)["results"]["size"] == 17);
  const Run ap = run({"bohr", "extract-ap", "--bohr", b, "--json"});
  CHECK(ap.code == 0);
  CHECK(json::parse(ap.out)["results"]["run"]["length"] == 17);
}
