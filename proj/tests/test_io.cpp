#include <doctest.h>

#include <filesystem>

#include "km/error.hpp"
#include "km/io.hpp"
#include "oracles.hpp"

using namespace km;

TEST_CASE("SHA-256 known answers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("canonical dumps sort keys") {
  const json a = json::parse(R"({"b":1,"a":[1,2]})");
  const json b = json::parse(R"({ "a" : [1, 2], "b" : 1 })");
  CHECK(canonical(a) == R"({"a":[1,2],"b":1})");
  CHECK(digest(a) == digest(b));
  CHECK(digest(a) == sha256_hex(canonical(a)));
}

TEST_CASE("set files") {
  const Group g = Group::parse("Z5xZ5");
  GSet a(g);
  a.insert(g.index_of(std::vector<std::int64_t>{0, 1}));
  a.insert(g.index_of(std::vector<std::int64_t>{2, 3}));
  const json j = set_to_json(a);
  CHECK(j == json::parse(R"({"group":"Z5^2","elements":[[0,1],[2,3]]})"));
  CHECK(set_from_json(j) == a);

  const GSet c = oracle::cyclic_set(12, {0, 5, 11});
  CHECK(set_from_json(set_to_json(c)) == c);
  CHECK_THROWS_AS(set_from_json(json::parse(R"({"group":"Z12","elements":[[-1]]})")), ParseError);
  CHECK_THROWS_AS(set_from_json(json::parse(R"({"group":"Z12","elements":[[3], [3]]})")), ParseError);

  CHECK_THROWS_AS(set_from_json(json::parse(R"({"group":"Z5xZ5","elements":[[0]]})")), ParseError);
  CHECK_THROWS_AS(set_from_json(json::parse(R"({"elements":[]})")), ParseError);
  CHECK_THROWS_AS(set_from_json(json::parse(R"({"group":"Z1000000","elements":[]})"), 1000), CapExceeded);
}

TEST_CASE("integer set files") {
  const IntegerSet s{100, {1, 2, 4}};
  const json j = integer_set_to_json(s);
  CHECK(j == json::parse(R"({"n":100,"elements":[1,2,4]})"));
  const IntegerSet back = integer_set_from_json(j);
  CHECK(back.n == 100);
  CHECK(back.elements == s.elements);
  CHECK_THROWS_AS(integer_set_from_json(json::parse(R"({"n":3,"elements":[4]})")), ParseError);
}

TEST_CASE("Bohr set files") {
  const BohrSet b = bohr_build(Group::cyclic(101), {1}, {0.5});
  const json j = bohr_to_json(b);
  CHECK(j == json::parse(R"({"group":"Z101","freqs":[[1]],"widths":[0.5]})"));
  const BohrSet back = bohr_from_json(j);
  CHECK(back.members() == b.members());
  CHECK(bohr_to_json(back) == j);
}

TEST_CASE("file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "km_io_roundtrip.json";
  const json j = set_to_json(oracle::cyclic_set(7, {1, 2}));
  write_json_file(path.string(), j);
  CHECK(read_json_file(path.string()) == j);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_json_file(path.string()), ParseError);
}
