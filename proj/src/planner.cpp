#include "styleaug/planner.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

std::vector<std::string> eligible_pool(const Dataset& dataset, Style style) {
  const ClassLabel wanted = style_uses_subjective_sources(style)
                                ? ClassLabel::kSubjective
                                : ClassLabel::kObjective;
  std::vector<std::string> pool;
  for (const auto& s : dataset.sentences) {
    if (s.label == wanted) pool.push_back(s.id);
  }
  return pool;
}

SplitMix64 style_stream(std::uint64_t seed, Language language, Style style) {
  return SplitMix64(stream_seed(seed, {"plan", language_code(language), style_name(style)}));
}

}  // namespace

std::string_view mode_name(SamplingMode mode) {
  return mode == SamplingMode::kUnder ? "under" : "over";
}

SamplingMode mode_from_string(std::string_view s) {
  std::string l(trim_view(s));
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (l == "under" || l == "us") return SamplingMode::kUnder;
  if (l == "over" || l == "os") return SamplingMode::kOver;
  throw ValidationError("unknown sampling mode '" + std::string(s) + "' (expected under or over)");
}

std::size_t SamplingPlan::total_selected() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.source_ids.size();
  return n;
}

std::size_t quota(const ClassStats& stats, SamplingMode mode) {
  const std::size_t delta = stats.delta();
  return mode == SamplingMode::kOver ? delta : delta / 2;
}

SamplingPlan build_plan(const Dataset& dataset, const std::vector<Style>& styles,
                        SamplingMode mode, std::uint64_t seed) {
  if (styles.empty()) throw ValidationError("cannot build a plan for an empty style set");
  {
    std::unordered_set<int> distinct;
    for (Style s : styles) {
      if (!distinct.insert(static_cast<int>(s)).second) {
        throw ValidationError("duplicate style '" + std::string(style_name(s)) + "' in plan request");
      }
    }
  }

  const std::size_t need = quota(stats(dataset), mode);
  SamplingPlan plan;
  plan.language = dataset.language;
  plan.mode = mode;
  plan.seed = seed;
  for (Style style : styles) {
    std::vector<std::string> pool = eligible_pool(dataset, style);
    if (pool.size() < need) {
      throw ValidationError("style '" + std::string(style_name(style)) + "': eligible pool has " +
                            std::to_string(pool.size()) + " sentences but the quota is " +
                            std::to_string(need));
    }
    SplitMix64 g = style_stream(seed, dataset.language, style);
    plan.entries.push_back({style, take_sample(pool, need, g)});
  }
  return plan;
}

SamplingPlan build_all_styles_plan(const Dataset& dataset, SamplingMode mode,
                                   std::uint64_t seed) {
  std::vector<Style> styles;
  for (Style s : kAllStyles) {
    if (s != Style::kNormal) styles.push_back(s);
  }
  const std::size_t need = quota(stats(dataset), mode);
  const std::size_t base = need / styles.size();
  const std::size_t remainder = need % styles.size();

  std::vector<std::string> pool = eligible_pool(dataset, styles.front());
  if (pool.size() < need) {
    throw ValidationError("all-styles plan: objective pool has " + std::to_string(pool.size()) +
                          " sentences but the total quota is " + std::to_string(need));
  }

  SamplingPlan plan;
  plan.language = dataset.language;
  plan.mode = mode;
  plan.seed = seed;
  plan.all_styles = true;
  for (std::size_t i = 0; i < styles.size(); ++i) {
    const std::size_t share = base + (i < remainder ? 1 : 0);
    SplitMix64 g = style_stream(seed, dataset.language, styles[i]);
    // Draw from the shrinking shared pool so the union stays duplicate-free.
    plan.entries.push_back({styles[i], take_sample(pool, share, g)});
  }
  return plan;
}

std::string serialize_plan(const SamplingPlan& plan) {
  std::string out;
  out += "plan_version\t1\n";
  out += "language\t";
  out += language_code(plan.language);
  out.push_back('\n');
  out += "mode\t";
  out += mode_name(plan.mode);
  out.push_back('\n');
  out += "seed\t" + std::to_string(plan.seed) + "\n";
  out += "scope\t";
  out += plan.all_styles ? "all_styles" : "single";
  out.push_back('\n');
  out += "dataset_digest\t";
  out += plan.dataset_digest.empty() ? "-" : plan.dataset_digest;
  out.push_back('\n');
  out += "config_digest\t";
  out += plan.config_digest.empty() ? "-" : plan.config_digest;
  out.push_back('\n');
  out += "total\t" + std::to_string(plan.total_selected()) + "\n";
  for (const auto& entry : plan.entries) {
    // One line per selection keeps the manifest diff-friendly and free of
    // separator collisions (ids may contain anything but tabs).
    if (entry.source_ids.empty()) {
      out += "empty_entry\t";
      out += style_name(entry.style);
      out.push_back('\n');
    }
    for (const auto& id : entry.source_ids) {
      out += "entry\t";
      out += style_name(entry.style);
      out.push_back('\t');
      out += id;
      out.push_back('\n');
    }
  }
  return out;
}

SamplingPlan parse_plan(std::string_view raw) {
  SamplingPlan plan;
  bool have_version = false;
  std::size_t declared_total = 0;
  bool have_total = false;
  auto entry_for = [&plan](Style style) -> PlanEntry& {
    for (auto& e : plan.entries) {
      if (e.style == style) return e;
    }
    plan.entries.push_back({style, {}});
    return plan.entries.back();
  };

  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim_view(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    const std::string_view kind = fields[0];
    if (kind == "plan_version" && fields.size() == 2) {
      if (fields[1] != "1") throw ValidationError("unsupported plan version '" + std::string(fields[1]) + "'");
      have_version = true;
    } else if (kind == "language" && fields.size() == 2) {
      plan.language = language_from_string(fields[1]);
    } else if (kind == "mode" && fields.size() == 2) {
      plan.mode = mode_from_string(fields[1]);
    } else if (kind == "seed" && fields.size() == 2) {
      plan.seed = std::stoull(std::string(fields[1]));
    } else if (kind == "scope" && fields.size() == 2) {
      plan.all_styles = fields[1] == "all_styles";
    } else if (kind == "dataset_digest" && fields.size() == 2) {
      plan.dataset_digest = fields[1] == "-" ? std::string() : std::string(fields[1]);
    } else if (kind == "config_digest" && fields.size() == 2) {
      plan.config_digest = fields[1] == "-" ? std::string() : std::string(fields[1]);
    } else if (kind == "total" && fields.size() == 2) {
      declared_total = std::stoull(std::string(fields[1]));
      have_total = true;
    } else if (kind == "empty_entry" && fields.size() == 2) {
      entry_for(style_from_string(fields[1]));
    } else if (kind == "entry" && fields.size() == 3) {
      auto& entry = entry_for(style_from_string(fields[1]));
      entry.source_ids.emplace_back(fields[2]);
    } else {
      throw ValidationError("plan line " + std::to_string(line_no) + ": unrecognized record");
    }
  }
  if (!have_version) throw ValidationError("plan file is missing its plan_version line");
  if (have_total && declared_total != plan.total_selected()) {
    throw ValidationError("plan file is corrupt: declared total " + std::to_string(declared_total) +
                          " but found " + std::to_string(plan.total_selected()) + " entries");
  }
  for (const auto& entry : plan.entries) {
    std::unordered_set<std::string_view> ids;
    for (const auto& id : entry.source_ids) {
      if (!ids.insert(id).second) {
        throw ValidationError("plan entry for style '" + std::string(style_name(entry.style)) +
                              "' repeats source id '" + id + "'");
      }
    }
  }
  return plan;
}

void save_plan(const SamplingPlan& plan, const std::filesystem::path& path) {
  write_file(path, serialize_plan(plan));
}

SamplingPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_file(path));
}

std::string plan_digest(const SamplingPlan& plan) {
  return sha256_hex(serialize_plan(plan));
}

}  // namespace styleaug
