// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_CLIENTS_HPP_
#define VIDEOMINER_CLIENTS_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "videominer/event.hpp"
#include "videominer/frame.hpp"
#include "videominer/node_output.hpp"
#include "videominer/rng.hpp"

namespace videominer {

inline constexpr std::size_t kDefaultMaxCaptionFrames = 8;

struct CaptionRequest {
  std::span<const Frame> frames;  // every frame of the event, in order
  std::string question;
  std::size_t start = 1;  // event position range in the working sequence
  std::size_t end = 1;
};

struct PolicyDecisionRequest {
  std::string caption;
  std::string question;
  int depth = 0;
  // Context for feature-based policies; text policies ignore it.
  int max_depth = 1;
  std::size_t frame_count = 0;
  std::optional<CaptionEmbedding> caption_embedding;
  std::optional<CaptionEmbedding> question_embedding;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual std::string caption(const CaptionRequest& request) const = 0;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per text; need not be normalized.
  virtual std::vector<CaptionEmbedding> embed(std::span<const std::string> texts) const = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  // Stochastic policies draw from `rng`; deterministic ones ignore it.
  virtual NodeOutput decide(const PolicyDecisionRequest& request, Rng& rng) const = 0;
};

class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual std::string answer(std::span<const std::string> captions,
                             const std::string& question) const = 0;
};

struct Clients {
  std::shared_ptr<const Captioner> captioner;
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<const Policy> policy;
  std::shared_ptr<const Answerer> answerer;
};

// Question-conditioned caption of one event. Errors: precondition on an
// empty event, EmptyResponse on blank text, ServiceError from the client.
std::string caption_event(const Event& event, const FrameSequence& seq,
                          const std::string& question, const Captioner& captioner);

// Never fails on malformed text; the parser downgrades it.
NodeOutput decide_node(const PolicyDecisionRequest& request, const Policy& policy,
                       Rng& rng);

// Errors: precondition on an empty caption list, EmptyResponse.
std::string answer_question(std::span<const std::string> captions,
                            const std::string& question, const Answerer& answerer);

// Raw client vectors, checked for a consistent dimension.
std::vector<CaptionEmbedding> embed(std::span<const std::string> texts,
                                    const Embedder& embedder);

}  // namespace videominer

#endif  // VIDEOMINER_CLIENTS_HPP_
