// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_MOCK_CLIENTS_HPP_
#define VIDEOMINER_MOCK_CLIENTS_HPP_

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "videominer/clients.hpp"

namespace videominer {

// Signed feature hashing of character n-grams (FNV-1a). Pure function of
// the text; identical inputs give identical vectors in every process.
class MockEmbedder final : public Embedder {
 public:
  explicit MockEmbedder(std::size_t dim = 64, std::size_t ngram = 3);
  std::vector<CaptionEmbedding> embed(std::span<const std::string> texts) const override;
  CaptionEmbedding embed_one(const std::string& text) const;

 private:
  std::size_t dim_;
  std::size_t ngram_;
};

// Describes an event by its frame range and mean brightness. Used when no
// captioning model is configured.
class HeuristicCaptioner final : public Captioner {
 public:
  std::string caption(const CaptionRequest& request) const override;
};

// Captions from a table of original-frame-index ranges. An event's caption
// joins the texts of every range it overlaps, in table order.
class ScriptedCaptioner final : public Captioner {
 public:
  struct Entry {
    std::int64_t first = 0;
    std::int64_t last = 0;
    std::string text;
  };

  explicit ScriptedCaptioner(std::vector<Entry> table, std::string fallback = "unremarkable footage");
  std::string caption(const CaptionRequest& request) const override;
  const std::vector<Entry>& table() const { return table_; }

 private:
  std::vector<Entry> table_;
  std::string fallback_;
};

// Emits text chosen by a function of the request, then parses it.
class ScriptedPolicy final : public Policy {
 public:
  using Script = std::function<std::string(const PolicyDecisionRequest&)>;
  explicit ScriptedPolicy(Script script);

  // Same well-formed emission for every node.
  static ScriptedPolicy always(Action action);

  NodeOutput decide(const PolicyDecisionRequest& request, Rng& rng) const override;

 private:
  Script script_;
};

// Returns a fixed answer and records the captions of the last call.
class ScriptedAnswerer final : public Answerer {
 public:
  explicit ScriptedAnswerer(std::string reply) : reply_(std::move(reply)) {}
  std::string answer(std::span<const std::string> captions,
                     const std::string& question) const override;
  std::vector<std::string> last_captions() const;

 private:
  std::string reply_;
  mutable std::mutex mutex_;
  mutable std::vector<std::string> last_captions_;
};

// Multiple-choice answerer over "(A) tok (B) tok ..." questions: picks the
// caption sharing the most question-stem words and returns the first option
// it mentions; falls back to the most-mentioned option, then "A".
class KeywordAnswerer final : public Answerer {
 public:
  std::string answer(std::span<const std::string> captions,
                     const std::string& question) const override;
};

struct ParsedQuestion {
  std::string stem;
  std::vector<std::pair<char, std::string>> options;
};

ParsedQuestion parse_multiple_choice(const std::string& question);

}  // namespace videominer

#endif  // VIDEOMINER_MOCK_CLIENTS_HPP_
