#include "styleaug/annotator.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

using nlohmann::json;

json annotation_to_json(const AnnotationRecord& r) {
  return json{{"item_key", r.item_key}, {"style", style_name(r.style)},
              {"model_id", r.model_id}, {"language", language_code(r.language)},
              {"q1", r.q1},             {"q2", r.q2},
              {"annotator", r.annotator}, {"timestamp", r.timestamp}};
}

AnnotationRecord annotation_from_json(const json& j) {
  AnnotationRecord r;
  r.item_key = j.at("item_key").get<std::string>();
  r.style = style_from_string(j.at("style").get<std::string>());
  r.model_id = j.at("model_id").get<std::string>();
  r.language = language_from_string(j.at("language").get<std::string>());
  r.q1 = j.at("q1").get<bool>();
  r.q2 = j.at("q2").get<bool>();
  r.annotator = j.value("annotator", "");
  r.timestamp = j.value("timestamp", "");
  return r;
}

// 'y'/'n'/'s'/'q' (case-insensitive, full words accepted); reprompts on
// anything else. EOF behaves like quit.
char read_answer(std::istream& in, std::ostream& out) {
  std::string line;
  for (;;) {
    if (!std::getline(in, line)) return 'q';
    std::string t = trim(line);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (t == "y" || t == "yes") return 'y';
    if (t == "n" || t == "no") return 'n';
    if (t == "s" || t == "skip") return 's';
    if (t == "q" || t == "quit") return 'q';
    out << "please answer y, n, s (skip) or q (save and quit): " << std::flush;
  }
}

}  // namespace

std::vector<ReviewItem> sample_for_review(const std::vector<GenerationRecord>& records,
                                          const Dataset& source_dataset, int per_style,
                                          std::uint64_t seed, std::ostream* warnings) {
  if (per_style < 1) throw ValidationError("per-style review count must be at least 1");
  std::unordered_map<std::string_view, const LabeledSentence*> by_id;
  for (const auto& s : source_dataset.sentences) by_id.emplace(s.id, &s);

  // (model, style) groups; styles keyed by catalog position for stable order.
  std::map<std::pair<std::string, std::size_t>, std::vector<const GenerationRecord*>> groups;
  for (const auto& r : records) {
    groups[{r.model_id, static_cast<std::size_t>(r.style)}].push_back(&r);
  }

  std::vector<ReviewItem> items;
  for (auto& [key, pool] : groups) {
    std::sort(pool.begin(), pool.end(), [](const GenerationRecord* a, const GenerationRecord* b) {
      return a->source_id < b->source_id;
    });
    const Style style = static_cast<Style>(key.second);
    const std::size_t want = static_cast<std::size_t>(per_style);
    if (pool.size() < want && warnings != nullptr) {
      *warnings << "warning: style " << style_name(style) << ", model " << key.first << ": only "
                << pool.size() << " record(s) available, drawing all\n";
    }
    SplitMix64 g(stream_seed(seed, {"review", style_name(style)}));
    for (const GenerationRecord* rec : take_sample(pool, want, g)) {
      auto src = by_id.find(rec->source_id);
      if (src == by_id.end()) {
        throw ValidationError("generation record " + rec->key + " references source id '" +
                              rec->source_id + "' missing from the dataset");
      }
      items.push_back({*rec, src->second->text});
    }
  }
  return items;
}

SessionResult run_session(const std::vector<ReviewItem>& items,
                          const std::string& annotator_id,
                          const std::filesystem::path& output_path, std::istream& in,
                          std::ostream& out) {
  std::unordered_set<std::string> done;
  for (const auto& existing : load_annotations(output_path)) {
    done.insert(existing.item_key);
  }

  if (output_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(output_path.parent_path(), ec);
  }
  std::ofstream file(output_path, std::ios::binary | std::ios::app);
  if (!file) throw IoError("cannot open annotation file for append: " + output_path.string());

  SessionResult result;
  std::size_t position = 0;
  for (const auto& item : items) {
    ++position;
    if (done.count(item.record.key)) {
      ++result.already_annotated;
      continue;
    }
    out << "\n[" << position << "/" << items.size() << "] style: "
        << style_name(item.record.style) << "  model: " << item.record.model_id
        << "  language: " << language_code(item.record.language) << "\n";
    out << "source:    " << item.source_text << "\n";
    out << "generated: " << item.record.output_text << "\n";

    out << "Q1: Does the text sound like the style it is supposed to be? [y/n/s/q] " << std::flush;
    const char a1 = read_answer(in, out);
    if (a1 == 'q') {
      result.quit_early = true;
      break;
    }
    if (a1 == 's') {
      ++result.skipped;
      continue;
    }
    out << "Q2: Does the text sound like it could be from a news article? [y/n/s/q] " << std::flush;
    const char a2 = read_answer(in, out);
    if (a2 == 'q') {
      result.quit_early = true;
      break;
    }
    if (a2 == 's') {
      ++result.skipped;
      continue;
    }

    AnnotationRecord record{item.record.key, item.record.style,  item.record.model_id,
                            item.record.language, a1 == 'y',     a2 == 'y',
                            annotator_id,         now_iso8601_utc()};
    file << annotation_to_json(record).dump() << '\n';
    file.flush();
    if (!file) throw IoError("error while appending annotation to " + output_path.string());
    done.insert(record.item_key);
    result.completed.push_back(std::move(record));
  }
  out << "\nsession: " << result.completed.size() << " annotated, " << result.skipped
      << " skipped, " << result.already_annotated << " previously done\n";
  return result;
}

std::vector<StyleScore> aggregate(const std::vector<AnnotationRecord>& records) {
  if (records.empty()) throw ValidationError("no annotation records to aggregate");
  struct Tally {
    std::size_t q1_yes = 0;
    std::size_t q2_yes = 0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, std::size_t>, Tally> tallies;
  for (const auto& r : records) {
    auto& t = tallies[{r.model_id, static_cast<std::size_t>(r.style)}];
    t.q1_yes += r.q1 ? 1 : 0;
    t.q2_yes += r.q2 ? 1 : 0;
    ++t.n;
  }
  std::vector<StyleScore> scores;
  for (const auto& [key, t] : tallies) {
    StyleScore s;
    s.model_id = key.first;
    s.style = static_cast<Style>(key.second);
    s.n = t.n;
    s.q1_score = static_cast<double>(t.q1_yes) / static_cast<double>(t.n);
    s.q2_score = static_cast<double>(t.q2_yes) / static_cast<double>(t.n);
    scores.push_back(std::move(s));
  }
  return scores;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  std::vector<AnnotationRecord> records;
  if (path.empty() || !std::filesystem::exists(path)) return records;
  const std::string raw = read_file(path);
  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    try {
      records.push_back(annotation_from_json(json::parse(line)));
    } catch (const json::exception& ex) {
      throw ValidationError("annotation file " + path.string() + " line " +
                            std::to_string(line_no) + ": " + ex.what());
    }
  }
  return records;
}

std::string render_scores(const std::vector<StyleScore>& scores) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-16s %5s %5s %5s\n", "style", "model", "Q1", "Q2", "n");
  out += line;
  // Catalog style order within each model block.
  std::vector<const StyleScore*> sorted;
  for (const auto& s : scores) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const StyleScore* a, const StyleScore* b) {
    if (a->model_id != b->model_id) return a->model_id < b->model_id;
    return static_cast<int>(a->style) < static_cast<int>(b->style);
  });
  for (const StyleScore* s : sorted) {
    std::snprintf(line, sizeof(line), "%-12s %-16s %5.1f %5.1f %5zu\n",
                  std::string(style_name(s->style)).c_str(), s->model_id.c_str(), s->q1_score,
                  s->q2_score, s->n);
    out += line;
  }
  return out;
}

}  // namespace styleaug
