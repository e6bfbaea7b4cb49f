// SPDX-License-Identifier: Apache-2.0

#include "videominer/mock_clients.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "videominer/error.hpp"
#include "videominer/frame.hpp"

namespace videominer {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Lowercase alphanumeric words with their order preserved.
std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

// Position of the first word of `phrase` inside `words` when all of its
// words occur there.
std::optional<std::size_t> mention_position(const std::vector<std::string>& words,
                                            const std::vector<std::string>& phrase) {
  if (phrase.empty()) return std::nullopt;
  std::optional<std::size_t> first;
  for (const auto& w : phrase) {
    const auto it = std::find(words.begin(), words.end(), w);
    if (it == words.end()) return std::nullopt;
    const auto pos = static_cast<std::size_t>(it - words.begin());
    if (!first || pos < *first) first = pos;
  }
  return first;
}

}  // namespace

MockEmbedder::MockEmbedder(std::size_t dim, std::size_t ngram) : dim_(dim), ngram_(ngram) {
  require(dim_ >= 1 && ngram_ >= 1, "mock embedder needs dim >= 1 and ngram >= 1");
}

CaptionEmbedding MockEmbedder::embed_one(const std::string& text) const {
  const std::string padded = " " + lowercase(text) + " ";
  std::vector<double> values(dim_, 0.0);
  auto add = [&](std::string_view gram) {
    const std::uint64_t h = fnv1a(gram);
    values[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
  };
  if (padded.size() < ngram_) {
    add(padded);
  } else {
    for (std::size_t i = 0; i + ngram_ <= padded.size(); ++i) {
      add(std::string_view(padded).substr(i, ngram_));
    }
  }
  if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) {
    values[fnv1a(padded) % dim_] = 1.0;
  }
  return CaptionEmbedding::normalized(std::move(values));
}

std::vector<CaptionEmbedding> MockEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<CaptionEmbedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(embed_one(text));
  return out;
}

std::string HeuristicCaptioner::caption(const CaptionRequest& request) const {
  require(!request.frames.empty(), "cannot caption an empty event");
  const auto picks = uniform_sample_positions(request.frames.size(), kDefaultMaxCaptionFrames);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t pos : picks) {
    for (std::uint8_t p : request.frames[pos].pixels) {
      sum += p;
      sum_sq += static_cast<double>(p) * p;
      ++count;
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double spread = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean));
  const char* tone = mean < 64 ? "dark" : mean < 128 ? "dim" : mean < 192 ? "bright" : "very bright";
  const char* texture = spread < 8 ? "flat" : spread < 32 ? "textured" : "busy";
  char buffer[128];
  std::snprintf(buffer, sizeof(buffer), "a %s %s scene with mean intensity %d", tone, texture,
                static_cast<int>(std::lround(mean / 8.0) * 8));
  return buffer;
}

ScriptedCaptioner::ScriptedCaptioner(std::vector<Entry> table, std::string fallback)
    : table_(std::move(table)), fallback_(std::move(fallback)) {}

std::string ScriptedCaptioner::caption(const CaptionRequest& request) const {
  require(!request.frames.empty(), "cannot caption an empty event");
  const std::int64_t first = request.frames.front().index;
  const std::int64_t last = request.frames.back().index;
  std::string out;
  for (const auto& entry : table_) {
    if (entry.last < first || entry.first > last) continue;
    if (!out.empty()) out += ". ";
    out += entry.text;
  }
  return out.empty() ? fallback_ : out;
}

ScriptedPolicy::ScriptedPolicy(Script script) : script_(std::move(script)) {}

ScriptedPolicy ScriptedPolicy::always(Action action) {
  const std::string text = format_node_text("scripted decision", action);
  return ScriptedPolicy([text](const PolicyDecisionRequest&) { return text; });
}

NodeOutput ScriptedPolicy::decide(const PolicyDecisionRequest& request, Rng&) const {
  return parse_node_output(script_(request));
}

std::string ScriptedAnswerer::answer(std::span<const std::string> captions,
                                     const std::string&) const {
  std::lock_guard lock(mutex_);
  last_captions_.assign(captions.begin(), captions.end());
  return reply_;
}

std::vector<std::string> ScriptedAnswerer::last_captions() const {
  std::lock_guard lock(mutex_);
  return last_captions_;
}

ParsedQuestion parse_multiple_choice(const std::string& question) {
  ParsedQuestion parsed;
  std::vector<std::pair<std::size_t, char>> marks;
  for (std::size_t i = 0; i + 2 < question.size(); ++i) {
    if (question[i] == '(' && std::isupper(static_cast<unsigned char>(question[i + 1])) &&
        question[i + 2] == ')') {
      marks.emplace_back(i, question[i + 1]);
    }
  }
  parsed.stem = marks.empty() ? question : question.substr(0, marks.front().first);
  for (std::size_t m = 0; m < marks.size(); ++m) {
    const std::size_t begin = marks[m].first + 3;
    const std::size_t end = m + 1 < marks.size() ? marks[m + 1].first : question.size();
    std::string text = question.substr(begin, end - begin);
    const auto first = text.find_first_not_of(" \t\n");
    const auto last = text.find_last_not_of(" \t\n,;");
    text = first == std::string::npos ? "" : text.substr(first, last - first + 1);
    parsed.options.emplace_back(marks[m].second, text);
  }
  return parsed;
}

std::string KeywordAnswerer::answer(std::span<const std::string> captions,
                                    const std::string& question) const {
  const ParsedQuestion parsed = parse_multiple_choice(question);
  if (parsed.options.empty()) return "A";

  std::set<std::string> stem_words;
  for (auto& w : words_of(parsed.stem)) {
    if (w.size() >= 4) stem_words.insert(w);
  }
  std::vector<std::vector<std::string>> option_words;
  for (const auto& [letter, text] : parsed.options) option_words.push_back(words_of(text));

  std::size_t best_score = 0;
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < captions.size(); ++c) {
    const auto words = words_of(captions[c]);
    const std::set<std::string> unique(words.begin(), words.end());
    std::size_t score = 0;
    for (const auto& w : stem_words) score += unique.count(w);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  if (best) {
    const auto words = words_of(captions[*best]);
    std::optional<std::size_t> best_pos;
    char letter = 0;
    for (std::size_t o = 0; o < option_words.size(); ++o) {
      const auto pos = mention_position(words, option_words[o]);
      if (pos && (!best_pos || *pos < *best_pos)) {
        best_pos = pos;
        letter = parsed.options[o].first;
      }
    }
    if (letter != 0) return std::string(1, letter);
  }

  std::vector<std::size_t> mentions(option_words.size(), 0);
  for (const auto& caption : captions) {
    const auto words = words_of(caption);
    for (std::size_t o = 0; o < option_words.size(); ++o) {
      if (mention_position(words, option_words[o])) ++mentions[o];
    }
  }
  const auto top = std::max_element(mentions.begin(), mentions.end());
  if (*top > 0) {
    return std::string(1, parsed.options[static_cast<std::size_t>(top - mentions.begin())].first);
  }
  return std::string(1, parsed.options.front().first);
}

}  // namespace videominer
