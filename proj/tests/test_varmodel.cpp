// Copyright 2026 The varcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "varcc/dataset.hpp"
#include "varcc/varmodel.hpp"

using namespace varcc;
using namespace varcc::varmodel;

namespace {

std::string fixture(const std::string& name) {
  return dataset::read_file(std::string(VARCC_TEST_DATA) + "/" + name);
}

}  // namespace

TEST_CASE("scan classifies the busybox-style fragment") {
  auto scan = scan_directives(fixture("listings/listing1.c"));
  REQUIRE(scan.conditionals.size() == 3);  // #if, #ifdef, and two #endif... no: if,endif,ifdef,endif
  auto tested = scan.tested_macros();
  CHECK(tested == std::set<std::string>{"M1", "M2"});
  CHECK(scan.defines.empty());
  // M1 && M2 appear bare in an #if expression: value-context uses.
  CHECK(scan.value_context.count("M1"));
  CHECK(scan.value_context.count("M2"));
}

TEST_CASE("scan records define targets separately") {
  auto scan = scan_directives(fixture("listings/listing2.c"));
  CHECK(scan.tested_macros() == std::set<std::string>{"A"});
  REQUIRE(scan.defines.size() == 2);  // B defined twice
  CHECK(scan.defines[0] == "B");
  CHECK(scan.defines[1] == "B");
}

TEST_CASE("scan of directive-free code is empty") {
  auto scan = scan_directives("int main(){return 0;}\n");
  CHECK(scan.conditionals.empty());
  CHECK(scan.defines.empty());
}

TEST_CASE("scan joins continuation lines and keeps the first line number") {
  auto scan = scan_directives("#if defined(AA) && \\\n    defined(BB)\nint x;\n#endif\n");
  REQUIRE(scan.conditionals.size() == 2);
  CHECK(scan.conditionals[0].line == 1);
  CHECK(scan.tested_macros() == std::set<std::string>{"AA", "BB"});
}

TEST_CASE("scan ignores directives inside block comments") {
  auto scan = scan_directives("/*\n#if BROKEN\n*/\n#ifdef REAL\nint x;\n#endif\n");
  CHECK(scan.tested_macros() == std::set<std::string>{"REAL"});
}

TEST_CASE("unbalanced conditionals are rejected with a line number") {
  try {
    scan_directives("#ifdef A\nint x;\n");
    FAIL("expected UnbalancedConditional");
  } catch (const UnbalancedConditional& e) {
    CHECK(e.line == 1);
  }
  CHECK_THROWS_AS(scan_directives("int x;\n#endif\n"), UnbalancedConditional);
  CHECK_THROWS_AS(scan_directives("#else\n"), UnbalancedConditional);
}

TEST_CASE("misspelled directives are rejected") {
  try {
    scan_directives("#ifdef A\nint x;\n#els\nint y;\n#endif\n");
    FAIL("expected MalformedDirective");
  } catch (const MalformedDirective& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("every bundled fixture scans clean; deleting an #endif breaks it") {
  auto rows = dataset::parse_dataset(fixture("dataset12.csv"));
  REQUIRE(rows.size() == 12);
  for (const auto& row : rows) {
    auto scan = scan_directives(row.code);  // must not throw
    auto lines = split_lines(row.code);
    auto endif_at = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
      return starts_with(trim_view(l), "#endif");
    });
    if (endif_at == lines.end()) continue;
    lines.erase(endif_at);
    CHECK_THROWS_AS(scan_directives(join(lines, "\n")), UnbalancedConditional);
  }
}

TEST_CASE("feature extraction drops internally defined macros") {
  auto features = extract_features(scan_directives(fixture("listings/listing2.c")));
  REQUIRE(features.size() == 1);
  CHECK(features[0].name == "A");
}

TEST_CASES_HOOK:
TEST_CASE("feature extraction on two-macro listing") {
  auto features = extract_features(scan_directives(fixture("listings/listing3.c")));
  REQUIRE(features.size() == 2);
  CHECK(features[0].name == "A");
  CHECK(features[1].name == "B");
}

TEST_CASE("feature extraction is line-order invariant and idempotent") {
  std::vector<std::string> blocks = {
      "#ifdef ALPHA\nint a;\n#endif",
      "#ifdef GAMMA\nint g;\n#endif",
      "#if defined(BETA)\nint b;\n#endif",
  };
  std::vector<FeatureMacro> reference;
  std::vector<int> order = {0, 1, 2};
  do {
    std::string code;
    for (int i : order) code += blocks[i] + "\n";
    auto features = extract_features(scan_directives(code));
    auto again = extract_features(scan_directives(code));
    CHECK(features == again);
    if (reference.empty())
      reference = features;
    else
      CHECK(features == reference);
  } while (std::next_permutation(order.begin(), order.end()));
  REQUIRE(reference.size() == 3);
}

TEST_CASE("enumeration yields 2^n distinct products in canonical order") {
  auto products = enumerate_products({FeatureMacro{"M1"}, FeatureMacro{"M2"}});
  REQUIRE(products.size() == 4);
  CHECK(products[0].canonical() == "M1=0,M2=0");
  CHECK(products[1].canonical() == "M1=0,M2=1");
  CHECK(products[2].canonical() == "M1=1,M2=0");
  CHECK(products[3].canonical() == "M1=1,M2=1");
}

TEST_CASE("enumeration of the empty set is the single empty product") {
  auto products = enumerate_products({});
  REQUIRE(products.size() == 1);
  CHECK(products[0].assignment.empty());
  CHECK(products[0].canonical().empty());
}

TEST_CASE("enumeration size and distinctness over random macro sets") {
  std::mt19937_64 rng(20260809);
  for (int trial = 0; trial < 50; ++trial) {
    int n = static_cast<int>(rng() % 9);
    std::vector<FeatureMacro> macros;
    std::set<std::string> names;
    while (static_cast<int>(macros.size()) < n) {
      std::string name = "F" + std::to_string(rng() % 50);
      if (names.insert(name).second) macros.push_back(FeatureMacro{name});
    }
    auto products = enumerate_products(macros, 8);
    CHECK(products.size() == (size_t{1} << n));
    std::set<std::string> canon;
    for (const auto& p : products) canon.insert(p.canonical());
    CHECK(canon.size() == products.size());
    CHECK(std::is_sorted(canon.begin(), canon.end()));
  }
}

TEST_CASE("enumeration cap is enforced") {
  std::vector<FeatureMacro> many;
  for (int i = 0; i < 9; ++i) many.push_back(FeatureMacro{"MACRO_" + std::to_string(i)});
  try {
    enumerate_products(many, 8);
    FAIL("expected TooManyFeatures");
  } catch (const TooManyFeatures& e) {
    CHECK(e.macros.size() == 9);
  }
  CHECK(enumerate_products(many, 16).size() == 512);
}

TEST_CASE("product parsing normalizes order and whitespace") {
  auto p = parse_product(" B=0 , A=1 ");
  CHECK(p.canonical() == "A=1,B=0");
  CHECK(parse_product("ENABLE_PAM=1,ENABLE_AUTH_MD5=0").canonical() ==
        "ENABLE_AUTH_MD5=0,ENABLE_PAM=1");
}

TEST_CASE("product parsing rejects bad input") {
  CHECK_THROWS_AS(parse_product("A=2"), BadProductSyntax);
  CHECK_THROWS_AS(parse_product("A=1,A=0"), BadProductSyntax);
  CHECK_THROWS_AS(parse_product("1BAD=1"), BadProductSyntax);
  CHECK_THROWS_AS(parse_product("A"), BadProductSyntax);
}

TEST_CASE("parse after format is the identity on random products") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Product p;
    int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i)
      p.assignment["K" + std::to_string(rng() % 30)] = (rng() & 1) != 0;
    Product round = parse_product(format_product(p));
    CHECK(round == p);
  }
}

TEST_CASE("source unit counts non-blank lines") {
  auto unit = SourceUnit::from_code("u", "int a;\n\n  \nint b;\n");
  CHECK(unit.loc == 2);
  CHECK_THROWS_AS(SourceUnit::from_code("empty", ""), std::invalid_argument);
}
