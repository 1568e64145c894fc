#include <doctest.h>

#include <fstream>

#include "cage/benchmark/manifest.hpp"
#include "cage/benchmark/reference_set.hpp"
#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/imaging/png_io.hpp"
#include "test_util.hpp"

using namespace cage;
using namespace cage::benchmark;

namespace {

std::string record(const std::string& id, const std::string& subject) {
  return R"({"id":")" + id + R"(","subject":")" + subject +
         R"(","grade_band":"6-8","topic":"t","labels":["a","b"],"prompt_text":"p"})";
}

std::vector<DiagramPrompt> stratified(std::size_t bio, std::size_t chem, std::size_t phys, std::size_t math) {
  std::vector<DiagramPrompt> out;
  auto add = [&](Subject s, std::size_t n, const char* prefix) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(DiagramPrompt::make(prefix + std::to_string(i), s, GradeBand::g6_8, "topic", {"x", "y"}, ""));
    }
  };
  add(Subject::biology, bio, "bio-");
  add(Subject::chemistry, chem, "chem-");
  add(Subject::physics, phys, "phys-");
  add(Subject::mathematics, math, "math-");
  return out;
}

}  // namespace

TEST_CASE("manifest parses and round-trips") {
  const auto prompts = load_manifest(testing::fixture("manifest10.jsonl"));
  REQUIRE(prompts.size() == 10);
  CHECK(prompts[0].id == "bio-001");
  CHECK(prompts[0].labels.size() == 9);
  CHECK(prompts[0].grade_band == GradeBand::g6_8);
  CHECK(parse_manifest(serialize_manifest(prompts)) == prompts);
}

TEST_CASE("manifest skips blank lines and reports the failing line") {
  CHECK(parse_manifest(record("a", "biology") + "\n\n" + record("b", "physics") + "\n").size() == 2);
  try {
    parse_manifest(record("a", "biology") + "\n{not json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_manifest(record("a", "geology")), ParseError);
  CHECK_THROWS_AS(parse_manifest(R"({"id":"a","subject":"biology","grade_band":"6-8","topic":"t","labels":[]})"),
                  ParseError);
}

TEST_CASE("duplicate ids are an error naming the id") {
  try {
    parse_manifest(record("bio-001", "biology") + "\n" + record("bio-001", "biology"));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bio-001") != std::string::npos);
  }
}

TEST_CASE("stratification check") {
  const auto full = stratified(110, 95, 95, 100);
  CHECK(full.size() == 400);
  const auto ok = validate_manifest(full, reference_strata());
  CHECK(ok.pass);
  CHECK(ok.counts.at(Subject::biology) == 110);

  const auto short_one = validate_manifest(stratified(110, 94, 95, 100), reference_strata());
  CHECK_FALSE(short_one.pass);
  REQUIRE(short_one.strata_mismatches.size() == 1);
  CHECK(short_one.strata_mismatches[0].find("chemistry") != std::string::npos);

  auto shuffled = full;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(validate_manifest(shuffled, reference_strata()).counts == ok.counts);
}

TEST_CASE("validation flags repeated labels and empty manifests") {
  std::vector<DiagramPrompt> p{DiagramPrompt::make("x", Subject::physics, GradeBand::k5, "t", {"Lens", "lens"}, "")};
  const auto v = validate_manifest(p);
  CHECK_FALSE(v.pass);
  CHECK(v.duplicate_labels.size() == 1);
  CHECK_FALSE(validate_manifest({}).pass);
}

TEST_CASE("reference set indexes PNGs and detects tampering") {
  testing::TempDir dir;
  imaging::write_png(dir / "a.png", imaging::RasterImage(4, 4, imaging::kBlack));
  imaging::write_png(dir / "b.png", imaging::RasterImage(4, 4, imaging::kWhite));
  const auto set = load_reference_set(dir.path());
  REQUIRE(set.size() == 2);
  CHECK(set.entries[0].id == "a");
  CHECK(std::filesystem::exists(dir / kReferenceIndexName));
  CHECK(load_reference_set(dir.path()).entries[1].checksum == set.entries[1].checksum);

  imaging::write_png(dir / "b.png", imaging::RasterImage(4, 4, imaging::Rgb{1, 2, 3}));
  CHECK_THROWS(load_reference_set(dir.path()));

  testing::TempDir empty;
  CHECK_THROWS_AS(load_reference_set(empty.path()), IoError);
  codec::write_file((empty / "bad.png").string(), std::string_view("not a png"));
  CHECK_THROWS_AS(load_reference_set(empty.path()), ParseError);
}
