#include "styleaug/checklist.hpp"

#include <algorithm>
#include <cctype>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

constexpr std::string_view kStylePlaceholder = "{style}";
constexpr std::string_view kSentencePlaceholder = "{sentence}";

// The shipped catalog. Surface forms and templates are frozen byte-for-byte;
// editing any template text requires bumping the version line.
constexpr std::string_view kBuiltinCatalog =
    "version\t1\n"
    "template\tEN\tRewrite this sentence in {style} language: Text: {sentence} Answer:\n"
    "template\tTR\tBu cümleyi {style} bir dille yeniden yaz: Cümle: {sentence} Yanıt:\n"
    "template\tDE\tSchreibe diesen Satz in {style} Sprache um Satz: {sentence} Antwort:\n"
    "style\tEN\tnormal\tnormal\n"
    "style\tEN\tsubjective\tsubjective\n"
    "style\tEN\temotional\temotional\n"
    "style\tEN\tpropaganda\tpropaganda\n"
    "style\tEN\tderogatory\tderogatory\n"
    "style\tEN\texaggerated\texaggerated\n"
    "style\tEN\tpartisan\tpartisan\n"
    "style\tEN\tprejudiced\tprejudiced\n"
    "style\tTR\tnormal\tnormal\n"
    "style\tTR\tsubjective\töznel\n"
    "style\tTR\temotional\tduygusal\n"
    "style\tTR\tpropaganda\tpropaganda\n"
    "style\tTR\tderogatory\taşağılayıcı\n"
    "style\tTR\texaggerated\tabartılı\n"
    "style\tTR\tpartisan\tpartizan\n"
    "style\tTR\tprejudiced\tönyargılı\n"
    "style\tDE\tnormal\tnormale\n"
    "style\tDE\tsubjective\tsubjektive\n"
    "style\tDE\temotional\temotionale\n"
    "style\tDE\tpropaganda\tPropaganda\n"
    "style\tDE\tderogatory\tabwertende\n"
    "style\tDE\texaggerated\tübertriebene\n"
    "style\tDE\tpartisan\tparteiische\n"
    "style\tDE\tprejudiced\tvoreingenommene\n";

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

void replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
  std::size_t at = text.find(placeholder);
  text.replace(at, placeholder.size(), value);
}

}  // namespace

std::string_view style_name(Style style) {
  switch (style) {
    case Style::kNormal: return "normal";
    case Style::kSubjective: return "subjective";
    case Style::kEmotional: return "emotional";
    case Style::kPropaganda: return "propaganda";
    case Style::kDerogatory: return "derogatory";
    case Style::kExaggerated: return "exaggerated";
    case Style::kPartisan: return "partisan";
    case Style::kPrejudiced: return "prejudiced";
  }
  return "normal";
}

Style style_from_string(std::string_view s) {
  std::string l = ascii_lower(s);
  for (Style style : kAllStyles) {
    if (l == style_name(style)) return style;
  }
  throw ValidationError("unknown style '" + std::string(s) + "'");
}

const std::vector<ChecklistEntry>& checklist_entries() {
  static const std::vector<ChecklistEntry> entries = {
      {Style::kEmotional,
       "A subjective text might be emotional",
       {"chong2019valuing", "journalism_ess"}},
      {Style::kPropaganda,
       "A subjective text might involve propaganda",
       {"zidouh2012hidden", "doi:10.1080/00224545.1943.9921701"}},
      {Style::kPrejudiced,
       "A subjective text might include prejudices",
       {"wiebe1990identifying", "wiebe2004learning"}},
      {Style::kPartisan,
       "A subjective text might be partisan",
       {"westerstaahl1983objective", "kaplan2003politics"}},
      {Style::kDerogatory,
       "A subjective text might be derogatory",
       {"white1976ethical", "george2017hate"}},
      {Style::kExaggerated,
       "A subjective text might be exaggerated",
       {"riloff2003learning", "volkova2017separating", "chesley2006using", "kramp2018hateful"}},
  };
  return entries;
}

const StyleCatalog& StyleCatalog::builtin() {
  static const StyleCatalog catalog = StyleCatalog::parse(kBuiltinCatalog);
  return catalog;
}

StyleCatalog StyleCatalog::parse(std::string_view raw) {
  StyleCatalog catalog;
  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim_view(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    const std::string_view kind = fields[0];
    if (kind == "version" && fields.size() == 2) {
      catalog.version_ = std::string(fields[1]);
    } else if (kind == "template" && fields.size() == 3) {
      Language lang = language_from_string(fields[1]);
      catalog.templates_[lang] = std::string(fields[2]);
    } else if (kind == "style" && fields.size() == 4) {
      Language lang = language_from_string(fields[1]);
      Style style = style_from_string(fields[2]);
      auto& forms = catalog.surface_forms_[lang];
      forms[static_cast<std::size_t>(style)] = std::string(fields[3]);
    } else {
      throw ValidationError("catalog line " + std::to_string(line_no) + ": unrecognized record");
    }
  }
  catalog.validate();
  return catalog;
}

StyleCatalog StyleCatalog::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

void StyleCatalog::validate() const {
  if (version_.empty()) throw ValidationError("catalog is missing a version line");
  if (templates_.empty()) throw ValidationError("catalog defines no templates");
  for (const auto& [lang, tmpl] : templates_) {
    if (!contains_once(tmpl, kStylePlaceholder) || !contains_once(tmpl, kSentencePlaceholder)) {
      throw ValidationError("template for " + std::string(language_code(lang)) +
                            " must contain {style} and {sentence} exactly once");
    }
    auto it = surface_forms_.find(lang);
    if (it == surface_forms_.end()) {
      throw ValidationError("catalog has a template but no styles for " +
                            std::string(language_code(lang)));
    }
    for (Style style : kAllStyles) {
      if (it->second[static_cast<std::size_t>(style)].empty()) {
        throw ValidationError("catalog is missing the " + std::string(style_name(style)) +
                              " surface form for " + std::string(language_code(lang)));
      }
    }
  }
  for (const auto& [lang, forms] : surface_forms_) {
    if (!templates_.count(lang)) {
      throw ValidationError("catalog has styles but no template for " +
                            std::string(language_code(lang)));
    }
  }
}

std::string StyleCatalog::serialize() const {
  std::string out = "version\t" + version_ + "\n";
  for (const auto& [lang, tmpl] : templates_) {
    out += "template\t";
    out += language_code(lang);
    out.push_back('\t');
    out += tmpl;
    out.push_back('\n');
  }
  for (const auto& [lang, forms] : surface_forms_) {
    for (Style style : kAllStyles) {
      out += "style\t";
      out += language_code(lang);
      out.push_back('\t');
      out += style_name(style);
      out.push_back('\t');
      out += forms[static_cast<std::size_t>(style)];
      out.push_back('\n');
    }
  }
  return out;
}

void StyleCatalog::save(const std::filesystem::path& path) const {
  write_file(path, serialize());
}

std::vector<Language> StyleCatalog::languages() const {
  std::vector<Language> langs;
  for (const auto& [lang, tmpl] : templates_) langs.push_back(lang);
  return langs;
}

bool StyleCatalog::has_language(Language lang) const {
  return templates_.count(lang) > 0;
}

const std::string& StyleCatalog::surface_form(Language lang, Style style) const {
  auto it = surface_forms_.find(lang);
  if (it == surface_forms_.end()) {
    throw ValidationError("catalog has no styles for language " + std::string(language_code(lang)));
  }
  return it->second[static_cast<std::size_t>(style)];
}

const std::string& StyleCatalog::prompt_template(Language lang) const {
  auto it = templates_.find(lang);
  if (it == templates_.end()) {
    throw ValidationError("catalog has no template for language " + std::string(language_code(lang)));
  }
  return it->second;
}

std::string StyleCatalog::render_prompt(Language lang, Style style,
                                        std::string_view sentence) const {
  if (trim_view(sentence).empty()) {
    throw ValidationError("cannot render a prompt for an empty sentence");
  }
  std::string prompt = prompt_template(lang);
  // {style} first: the sentence is untrusted text and may itself contain
  // placeholder-shaped substrings.
  replace_once(prompt, kStylePlaceholder, surface_form(lang, style));
  replace_once(prompt, kSentencePlaceholder, sentence);
  return prompt;
}

}  // namespace styleaug
