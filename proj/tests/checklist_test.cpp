#include <doctest.h>

#include <cctype>
#include <string>

#include "styleaug/checklist.hpp"
#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"
#include "testutil.hpp"

using namespace styleaug;

TEST_CASE("surface forms match the shipped catalog byte-for-byte") {
  const auto& cat = StyleCatalog::builtin();
  CHECK(cat.surface_form(Language::kEn, Style::kEmotional) == "emotional");
  CHECK(cat.surface_form(Language::kTr, Style::kPrejudiced) == "önyargılı");
  CHECK(cat.surface_form(Language::kDe, Style::kPartisan) == "parteiische");
  CHECK(cat.surface_form(Language::kDe, Style::kExaggerated) == "übertriebene");
  CHECK(cat.surface_form(Language::kTr, Style::kDerogatory) == "aşağılayıcı");
  CHECK(cat.surface_form(Language::kDe, Style::kPropaganda) == "Propaganda");
}

TEST_CASE("render_prompt reproduces the three template examples") {
  const auto& cat = StyleCatalog::builtin();
  CHECK(cat.render_prompt(Language::kEn, Style::kEmotional, "Rates rose.") ==
        "Rewrite this sentence in emotional language: Text: Rates rose. Answer:");
  CHECK(cat.render_prompt(Language::kDe, Style::kNormal, "Es regnet.") ==
        "Schreibe diesen Satz in normale Sprache um Satz: Es regnet. Antwort:");
  CHECK(cat.render_prompt(Language::kTr, Style::kSubjective, "Hava güzel.") ==
        "Bu cümleyi öznel bir dille yeniden yaz: Cümle: Hava güzel. Yanıt:");
}

TEST_CASE("all 24 prompts match their golden files") {
  const auto& cat = StyleCatalog::builtin();
  const auto dir = testutil::golden_dir() / "prompts";
  const Language langs[] = {Language::kEn, Language::kTr, Language::kDe};
  int checked = 0;
  for (Language lang : langs) {
    for (Style style : kAllStyles) {
      std::string name{language_code(lang)};
      for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      const auto path = dir / (name + "_" + std::string(style_name(style)) + ".txt");
      const std::string expected = read_file(path);
      // Golden files keep the placeholder text ${sentence} where the input
      // sentence lands, so rendering with that literal must reproduce them.
      const std::string prompt = cat.render_prompt(lang, style, "${sentence}");
      CHECK_MESSAGE(prompt + "\n" == expected, "golden mismatch for ", path.string());
      ++checked;
    }
  }
  CHECK(checked == 24);
}

TEST_CASE("render_prompt embeds the sentence verbatim exactly once") {
  const auto& cat = StyleCatalog::builtin();
  SplitMix64 g(99);
  static const char* kSamples[] = {
      "Vergiler yükseliyor.", "Die Stadt wächst schnell.", "Numbers went up by 4%.",
      "Bu cümleyi tekrar yaz", "weird {style} braces inside",
  };
  for (const char* sentence : kSamples) {
    for (Style style : kAllStyles) {
      const Language lang = static_cast<Language>(g.bounded(3));
      const std::string prompt = cat.render_prompt(lang, style, sentence);
      CHECK(contains_once(prompt, sentence));
      CHECK(prompt == cat.render_prompt(lang, style, sentence));  // byte-stable
    }
  }
}

TEST_CASE("render_prompt validates its inputs") {
  const auto& cat = StyleCatalog::builtin();
  CHECK_THROWS_AS(cat.render_prompt(Language::kEn, Style::kNormal, "   "), ValidationError);
  const StyleCatalog partial = StyleCatalog::parse(
      "version\t2\n"
      "template\tEN\tSay {style}: {sentence}\n"
      "style\tEN\tnormal\tnormal\nstyle\tEN\tsubjective\tsubjective\n"
      "style\tEN\temotional\temotional\nstyle\tEN\tpropaganda\tpropaganda\n"
      "style\tEN\tderogatory\tderogatory\nstyle\tEN\texaggerated\texaggerated\n"
      "style\tEN\tpartisan\tpartisan\nstyle\tEN\tprejudiced\tprejudiced\n");
  CHECK_THROWS_AS(partial.render_prompt(Language::kTr, Style::kNormal, "x"), ValidationError);
}

TEST_CASE("catalog files round-trip and validate placeholders") {
  const auto& cat = StyleCatalog::builtin();
  const StyleCatalog reloaded = StyleCatalog::parse(cat.serialize());
  CHECK(reloaded.serialize() == cat.serialize());
  CHECK(reloaded.version() == cat.version());

  CHECK_THROWS_AS(StyleCatalog::parse("version\t1\ntemplate\tEN\tno placeholders\n"),
                  ValidationError);
  CHECK_THROWS_AS(
      StyleCatalog::parse("version\t1\ntemplate\tEN\t{style} {style} {sentence}\n"),
      ValidationError);
  CHECK_THROWS_AS(StyleCatalog::parse("template\tEN\t{style} {sentence}\n"), ValidationError);
}

// Guards the frozen catalog bytes: any template or surface-form edit (or a
// forgotten version bump) changes this digest and must be made deliberately,
// together with new golden prompt files.
TEST_CASE("builtin catalog bytes are frozen") {
  CHECK(StyleCatalog::builtin().version() == "1");
  CHECK(sha256_hex(StyleCatalog::builtin().serialize()) ==
        "cdcd0adf5260bb347991955027eaa9405949f2573d22edd40a736b9fbac0d685");
}

TEST_CASE("checklist carries the six indicators with citations") {
  const auto& entries = checklist_entries();
  REQUIRE(entries.size() == 6);
  CHECK(entries[0].style == Style::kEmotional);
  CHECK(entries[0].statement == "A subjective text might be emotional");
  CHECK_FALSE(entries[0].citations.empty());
  bool has_exaggerated = false;
  for (const auto& e : entries) {
    if (e.style == Style::kExaggerated) {
      has_exaggerated = true;
      CHECK(e.statement == "A subjective text might be exaggerated");
    }
  }
  CHECK(has_exaggerated);
}

TEST_CASE("style names parse case-insensitively and reject unknowns") {
  CHECK(style_from_string("Partisan") == Style::kPartisan);
  CHECK(style_from_string("NORMAL") == Style::kNormal);
  CHECK_THROWS_AS(style_from_string("sarcastic"), ValidationError);
  CHECK(style_uses_subjective_sources(Style::kNormal));
  CHECK_FALSE(style_uses_subjective_sources(Style::kPartisan));
}
