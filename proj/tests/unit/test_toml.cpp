#include <catch2/catch_amalgamated.hpp>

#include "burnscan/util/toml.hpp"

using Catch::Matchers::ContainsSubstring;
using namespace burnscan;

TEST_CASE("toml: scalars, sections and comments") {
  const auto t = toml::parse(R"(
# run settings
seed = 42          # trailing comment
name = "west # nile"
ratio = 0.7
flag = true
neg = -3

[extract]
stride = 128
mode = "scene"

[infer]
threshold = 0.5
)");

  CHECK(t.get_int("seed") == 42);
  CHECK(t.get_string("name") == "west # nile");
  CHECK(t.get_double("ratio") == Catch::Approx(0.7));
  CHECK(t.get_bool("flag"));
  CHECK(t.get_int("neg") == -3);
  CHECK(t.get_int("extract.stride") == 128);
  CHECK(t.get_string("extract.mode") == "scene");
  CHECK(t.get_double("infer.threshold") == Catch::Approx(0.5));

  CHECK(!t.has("missing"));
  CHECK(t.get_int("missing", 7) == 7);
  CHECK(t.get_string("missing", "x") == "x");
  // integer keys widen when read as doubles
  CHECK(t.get_double("seed") == 42.0);
}

TEST_CASE("toml: arrays and escapes") {
  const auto t = toml::parse(R"(
years = [2015, 2016, 2017]
names = ["a", "b,c", "d\"e"]
path = "C:\\data\nrow"
empty = []
)");
  CHECK(t.get_int_array("years") == std::vector<long long>{2015, 2016, 2017});
  const auto names = t.get_string_array("names");
  REQUIRE(names.size() == 3);
  CHECK(names[1] == "b,c");
  CHECK(names[2] == "d\"e");
  CHECK(t.get_string("path") == "C:\\data\nrow");
  CHECK(t.get_int_array("empty").empty());
}

TEST_CASE("toml: malformed input names the line") {
  CHECK_THROWS_WITH(toml::parse("a = 1\nnot a pair\n", "run.toml"),
                    ContainsSubstring("run.toml:2"));
  CHECK_THROWS_WITH(toml::parse("a =\n"), ContainsSubstring("empty value"));
  CHECK_THROWS_WITH(toml::parse("= 4\n"), ContainsSubstring("empty key"));
  CHECK_THROWS_WITH(toml::parse("[open\n"), ContainsSubstring("table header"));
  CHECK_THROWS_WITH(toml::parse("a = what\n"), ContainsSubstring("cannot parse value"));
  CHECK_THROWS_WITH(toml::parse("a = [1, 2\n"), ContainsSubstring("unterminated array"));
  CHECK_THROWS_WITH(toml::parse("a = 1\na = 2\n"), ContainsSubstring("duplicate key"));
  CHECK_THROWS_WITH(toml::parse("[s]\na = 1\na = 2\n"),
                    ContainsSubstring("duplicate key \"s.a\""));
}

TEST_CASE("toml: type mismatches are loud") {
  const auto t = toml::parse("a = \"text\"\nb = 1.5\nc = [1]\n");
  CHECK_THROWS_WITH(t.get_int("a"), ContainsSubstring("not an integer"));
  CHECK_THROWS_WITH(t.get_bool("b"), ContainsSubstring("not a boolean"));
  CHECK_THROWS_WITH(t.get_string("c"), ContainsSubstring("not a string"));
  CHECK_THROWS_WITH(t.get_int_array("a"), ContainsSubstring("not an array"));
  CHECK_THROWS_WITH(t.get_string_array("c"), ContainsSubstring("not a string array"));
}
