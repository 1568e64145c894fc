#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "cage/codec.hpp"
#include "cage/error.hpp"
#include "cage/synth/codegen.hpp"
#include "cage/synth/label_extract.hpp"
#include "cage/synth/llm.hpp"
#include "cage/synth/renderer.hpp"
#include "cage/synth/repair.hpp"
#include "cage/synth/svg_renderer.hpp"
#include "test_util.hpp"

using namespace cage;
using namespace cage::synth;
using benchmark::DiagramPrompt;
using benchmark::GradeBand;
using benchmark::Subject;

namespace {

DiagramPrompt heart() {
  return DiagramPrompt::make("bio-heart", Subject::biology, GradeBand::g9_12, "heart",
                             {"aorta", "left atrium", "right ventricle"}, "Label the heart.");
}

}  // namespace

TEST_CASE("label extraction per language") {
  const auto py = extract_label_calls(
      R"(ax.text(0.1, 0.2, "Nucleus")
plt.annotate('Ribosome', xy=(1, 2))
ax.text(x, y, name)
ax.set_title(label="ignored"); ax.text(0, 0, s="Cytoplasm"))",
      RenderLanguage::python_matplotlib);
  CHECK(py == std::vector<std::string>{"Nucleus", "Ribosome", "Cytoplasm"});

  const auto tikz = extract_label_calls(R"(\node at (0,0) {Hypotenuse};
\draw (0,0) -- (1,0) node[below] {Adjacent};)",
                                        RenderLanguage::latex_tikz);
  CHECK(tikz == std::vector<std::string>{"Hypotenuse", "Adjacent"});

  const auto svg = extract_label_calls(R"(<svg><text x="1" y="2">Oxygen</text><text><tspan>H</tspan>2</text></svg>)",
                                       RenderLanguage::svg);
  CHECK(svg == std::vector<std::string>{"Oxygen", "H2"});

  CHECK_THROWS_AS(extract_label_calls(R"(ax.text(0, 0, "open)", RenderLanguage::python_matplotlib), ExtractionError);
  CHECK_THROWS_AS(extract_label_calls(R"(<text>never closed)", RenderLanguage::svg), ExtractionError);
}

TEST_CASE("codegen prompt embeds labels and feedback") {
  const auto p = heart();
  const auto plain = build_codegen_prompt(p, RenderLanguage::svg);
  CHECK(instruction_prompt_id(plain) == std::optional<std::string>("bio-heart"));
  CHECK(instruction_labels(plain) == p.labels);
  CHECK(instruction_language(plain) == RenderLanguage::svg);
  CHECK_FALSE(instruction_has_feedback(plain));

  VerificationResult v;
  v.labels_ok = false;
  v.missing_labels = {"aorta"};
  v.executes_ok = true;
  const auto fb = build_codegen_prompt(p, RenderLanguage::svg, &v);
  CHECK(instruction_has_feedback(fb));
  CHECK(fb.find("missing \"aorta\"") != std::string::npos);
}

TEST_CASE("language choice prompt and parsing") {
  const auto q = build_language_choice_prompt(heart());
  CHECK(is_language_choice_prompt(q));
  CHECK_FALSE(is_language_choice_prompt(build_codegen_prompt(heart(), RenderLanguage::svg)));
  CHECK(parse_language_choice("I'd use svg here.") == RenderLanguage::svg);
  CHECK(parse_language_choice("latex-tikz") == RenderLanguage::latex_tikz);
  CHECK_FALSE(parse_language_choice("svg or latex-tikz").has_value());
  CHECK_FALSE(parse_language_choice("no idea").has_value());
}

TEST_CASE("structure connectivity") {
  CHECK(check_structure({{"a", "b", "c"}, {{"a", "b"}, {"b", "c"}}}).first);
  const auto [ok, detail] = check_structure({{"a", "b", "c"}, {{"a", "b"}}});
  CHECK_FALSE(ok);
  CHECK(detail.find("c") != std::string::npos);
}

TEST_CASE("svg renderer draws plates and reports regions") {
  const auto svg = template_svg({"aorta", "left atrium"});
  const auto out = render_svg(svg);
  REQUIRE(out.regions.size() == 2);
  CHECK(out.regions[0].text == "aorta");
  CHECK(out.structure.has_value());
  CHECK(out.image.width() > 0);
  CHECK_THROWS_AS(render_svg("<svg width=\"10\""), ParseError);
  CHECK_THROWS_AS(render_svg(R"(<svg width="5000" height="5000"></svg>)", 1000), ValidationError);
}

TEST_CASE("verify_code checks labels, execution and structure") {
  const auto p = heart();
  const auto art = CodeArtifact::make(RenderLanguage::svg, template_svg({"aorta", "LEFT ATRIUM"}), 1);
  const BuiltinSvgRenderer r;
  RenderAttempt ok{render(art, r), ""};
  const auto v = verify_code(art, p, &ok);
  CHECK_FALSE(v.labels_ok);
  CHECK(v.missing_labels == std::vector<std::string>{"right ventricle"});
  CHECK(v.executes_ok);
  CHECK(v.structure == StructureStatus::pass);

  RenderAttempt failed{std::nullopt, "boom"};
  const auto v2 = verify_code(art, p, &failed);
  CHECK_FALSE(v2.executes_ok);
  CHECK(v2.execution_error == "boom");
  CHECK(v2.structure == StructureStatus::skipped);
}

TEST_CASE("template llm honours omissions and feedback") {
  TemplateLlm::Options o;
  o.omit_first_attempt["bio-heart"] = {"aorta"};
  const TemplateLlm llm(o);
  const auto p = heart();
  const auto first = llm.generate(build_codegen_prompt(p, RenderLanguage::svg));
  CHECK(extract_label_calls(first, RenderLanguage::svg).size() == 2);
  VerificationResult v;
  v.missing_labels = {"aorta"};
  v.executes_ok = true;
  const auto second = llm.generate(build_codegen_prompt(p, RenderLanguage::svg, &v));
  CHECK(extract_label_calls(second, RenderLanguage::svg).size() == 3);

  const auto py = llm.generate(build_codegen_prompt(p, RenderLanguage::python_matplotlib));
  CHECK(extract_label_calls(py, RenderLanguage::python_matplotlib).size() == 2);
  const auto tikz = llm.generate(build_codegen_prompt(p, RenderLanguage::latex_tikz));
  CHECK(extract_label_calls(tikz, RenderLanguage::latex_tikz).size() == 2);
}

TEST_CASE("scripted llm replays and repeats") {
  const ScriptedLlm llm(ScriptedLlm::Scripts{{"bio-heart", {"one", "two"}}, {"*", {"fallback"}}});
  const auto instr = build_codegen_prompt(heart(), RenderLanguage::svg);
  CHECK(llm.generate(instr) == "one");
  CHECK(llm.generate(instr) == "two");
  CHECK(llm.generate(instr) == "two");
  CHECK(llm.calls("bio-heart") == 3);
  auto other = heart();
  other.id = "x";
  CHECK(llm.generate(build_codegen_prompt(other, RenderLanguage::svg)) == "fallback");
  CHECK_THROWS_AS(ScriptedLlm(ScriptedLlm::Scripts{}).generate(instr), BackendError);
}

TEST_CASE("code fences are stripped") {
  CHECK(strip_code_fences("Here:\n```svg\n<svg/>\n```\nthanks") == "<svg/>\n");
  CHECK(strip_code_fences("<svg/>") == "<svg/>");
}

TEST_CASE("repair loop converges on the second attempt and persists attempts") {
  testing::TempDir dir;
  const auto p = heart();
  const ScriptedLlm llm(ScriptedLlm::Scripts{{p.id, {template_svg({"aorta", "left atrium"}), template_svg(p.labels)}}});
  const BuiltinSvgRenderer r;
  RepairOptions opts;
  opts.attempts_dir = dir.path();
  const auto res = synthesize_with_repair(p, llm, r, RenderLanguage::svg, opts);
  CHECK(res.artifact.attempt_index == 2);
  REQUIRE(res.attempts.size() == 2);
  CHECK_FALSE(res.attempts[0].verification.passed());
  CHECK(res.attempts[1].verification.passed());
  for (int i : {1, 2}) {
    const auto a = dir / ("attempt-" + std::to_string(i));
    CHECK(std::filesystem::exists(a / "code.svg"));
    CHECK(std::filesystem::exists(a / "prog.png"));
    const auto j = nlohmann::json::parse(codec::read_text_file((a / "verify.json").string()));
    CHECK(j.at("attempt_index") == i);
  }
}

TEST_CASE("repair loop exhausts and reports the missing labels") {
  testing::TempDir dir;
  const auto p = heart();
  TemplateLlm::Options o;
  o.never_label = {p.id};
  const TemplateLlm llm(o);
  const BuiltinSvgRenderer r;
  RepairOptions opts;
  opts.max_attempts = 4;
  opts.attempts_dir = dir.path();
  try {
    synthesize_with_repair(p, llm, r, RenderLanguage::svg, opts);
    FAIL("expected RepairExhausted");
  } catch (const RepairExhausted& e) {
    CHECK(e.attempts().size() == 4);
    CHECK(e.last().missing_labels.size() == 3);
    CHECK(std::string(e.what()).find("aorta") != std::string::npos);
  }
  CHECK(std::filesystem::exists(dir / "attempt-4" / "verify.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "attempt-5"));
}

TEST_CASE("render errors become failed attempts") {
  const auto p = heart();
  const ScriptedLlm llm(ScriptedLlm::Scripts{{"*", {"<svg width=\"10\"", template_svg(p.labels)}}});
  const BuiltinSvgRenderer r;
  const auto res = synthesize_with_repair(p, llm, r, RenderLanguage::svg);
  CHECK(res.attempts.size() == 2);
  CHECK_FALSE(res.attempts[0].verification.executes_ok);
}

TEST_CASE("deterministic renders are byte-identical") {
  const auto art = CodeArtifact::make(RenderLanguage::svg, template_svg({"anode", "cathode"}), 1);
  const BuiltinSvgRenderer r;
  CHECK(render(art, r).image == render(art, r).image);
  CHECK(extract_label_calls(art.source, RenderLanguage::svg) == art.extracted_labels);
}

TEST_CASE("render enforces the output pixel limit") {
  const auto art = CodeArtifact::make(RenderLanguage::svg, template_svg({"anode"}), 1);
  RenderLimits limits;
  limits.max_output_px = 100;
  CHECK_THROWS(render(art, BuiltinSvgRenderer(), limits));
}

TEST_CASE("command renderer runs a template and picks up sidecars") {
  const std::string cage = CAGE_BIN;
  const CommandRenderer r("cli-svg", cage + " render {source} {output} --regions {workdir}/regions.json");
  const auto art = CodeArtifact::make(RenderLanguage::svg, template_svg({"anode", "cathode"}), 1);
  RenderLimits limits;
  limits.timeout = std::chrono::seconds(20);
  const auto out = render(art, r, limits);
  REQUIRE(out.regions.size() == 2);
  CHECK(out.regions[1].text == "cathode");
  CHECK(out.image == render_svg(art.source).image);

  const CommandRenderer broken("broken", "echo oops >&2; exit 2");
  try {
    render(art, broken, limits);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
  const CommandRenderer slow("slow", "sleep 5");
  limits.timeout = std::chrono::milliseconds(300);
  CHECK_THROWS_AS(render(art, slow, limits), TimeoutError);
}
