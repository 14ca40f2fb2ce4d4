#include "styleaug/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

std::string ascii_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

const char* kHeader = "sentence_id\tsentence\tlabel\n";

}  // namespace

std::string_view label_to_string(ClassLabel label) {
  return label == ClassLabel::kObjective ? "OBJ" : "SUBJ";
}

ClassLabel label_from_string(std::string_view s) {
  std::string u = ascii_upper(s);
  if (u == "OBJ") return ClassLabel::kObjective;
  if (u == "SUBJ") return ClassLabel::kSubjective;
  throw ValidationError("unknown label '" + std::string(s) + "' (expected OBJ or SUBJ)");
}

std::string_view language_code(Language lang) {
  switch (lang) {
    case Language::kEn: return "EN";
    case Language::kTr: return "TR";
    case Language::kDe: return "DE";
  }
  return "EN";
}

Language language_from_string(std::string_view s) {
  std::string u = ascii_upper(s);
  if (u == "EN") return Language::kEn;
  if (u == "TR") return Language::kTr;
  if (u == "DE") return Language::kDe;
  throw ValidationError("unsupported language '" + std::string(s) + "' (expected EN, TR or DE)");
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  std::string u = ascii_upper(s);
  if (u == "TRAIN") return Split::kTrain;
  if (u == "DEV") return Split::kDev;
  if (u == "TEST") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

Dataset parse_tsv(std::string_view raw, Language language, Split split_kind) {
  Dataset dataset{language, split_kind, {}};
  std::unordered_set<std::string> seen_ids;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_content = false;
  while (pos <= raw.size()) {
    if (pos == raw.size()) {
      break;
    }
    std::size_t eol = raw.find('\n', pos);
    std::string_view line = raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? raw.size() : eol + 1;
    ++line_no;

    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim_view(line).empty()) continue;

    auto fields = split(line, '\t');
    if (!saw_content && !fields.empty() && fields[0] == "sentence_id") {
      saw_content = true;  // header line
      continue;
    }
    saw_content = true;

    if (fields.size() != 3) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                            std::to_string(fields.size()));
    }
    std::string id = trim(fields[0]);
    std::string sentence = trim(fields[1]);
    std::string label_text = trim(fields[2]);
    if (id.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty sentence id");
    }
    if (sentence.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty sentence text");
    }
    ClassLabel label;
    try {
      label = label_from_string(label_text);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_ids.insert(id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate sentence id '" + id + "'");
    }
    dataset.sentences.push_back({std::move(id), std::move(sentence), label, std::nullopt});
  }
  return dataset;
}

Dataset load_tsv(const std::filesystem::path& path, Language language, Split split_kind) {
  return parse_tsv(read_file(path), language, split_kind);
}

std::string serialize_tsv(const Dataset& dataset) {
  std::string out = kHeader;
  for (const auto& s : dataset.sentences) {
    out += s.id;
    out.push_back('\t');
    out += s.text;
    out.push_back('\t');
    out += label_to_string(s.label);
    out.push_back('\n');
  }
  return out;
}

void save_tsv(const Dataset& dataset, const std::filesystem::path& path) {
  write_file(path, serialize_tsv(dataset));
}

ClassStats stats(const Dataset& dataset) {
  ClassStats st;
  for (const auto& s : dataset.sentences) {
    if (s.label == ClassLabel::kObjective) {
      ++st.objective_count;
    } else {
      ++st.subjective_count;
    }
  }
  return st;
}

}  // namespace styleaug
