// SPDX-License-Identifier: Apache-2.0

#include "videominer/clients.hpp"

#include <algorithm>
#include <cctype>

#include "videominer/error.hpp"

namespace videominer {
namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string caption_event(const Event& event, const FrameSequence& seq,
                          const std::string& question, const Captioner& captioner) {
  require(event.start >= 1 && event.start <= event.end && event.end <= seq.size(),
          "event must cover at least one frame of the sequence");
  CaptionRequest request;
  request.frames = event.frames(seq);
  request.question = question;
  request.start = event.start;
  request.end = event.end;
  std::string text = captioner.caption(request);
  if (blank(text)) {
    fail(ErrorCode::kEmptyResponse, "captioner returned an empty caption for frames " +
                                        std::to_string(event.start) + "-" +
                                        std::to_string(event.end));
  }
  return text;
}

NodeOutput decide_node(const PolicyDecisionRequest& request, const Policy& policy, Rng& rng) {
  require(request.depth >= 0, "node depth must be >= 0");
  return policy.decide(request, rng);
}

std::string answer_question(std::span<const std::string> captions,
                            const std::string& question, const Answerer& answerer) {
  require(!captions.empty(), "answer_question needs at least one caption");
  std::string text = answerer.answer(captions, question);
  if (blank(text)) fail(ErrorCode::kEmptyResponse, "answerer returned an empty reply");
  return text;
}

std::vector<CaptionEmbedding> embed(std::span<const std::string> texts,
                                    const Embedder& embedder) {
  require(!texts.empty(), "embed needs at least one text");
  auto vectors = embedder.embed(texts);
  if (vectors.size() != texts.size()) {
    fail(ErrorCode::kServiceError, "embedder returned " + std::to_string(vectors.size()) +
                                       " vectors for " + std::to_string(texts.size()) +
                                       " texts");
  }
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].dim() != vectors.front().dim()) {
      fail(ErrorCode::kDimensionMismatch,
           "embedding " + std::to_string(i) + " has dimension " +
               std::to_string(vectors[i].dim()) + ", expected " +
               std::to_string(vectors.front().dim()));
    }
  }
  return vectors;
}

}  // namespace videominer
