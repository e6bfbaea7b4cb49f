// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_EVENT_HPP_
#define VIDEOMINER_EVENT_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "videominer/frame.hpp"

namespace videominer {

// Unit-norm caption embedding.
struct CaptionEmbedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double dot(const CaptionEmbedding& other) const;
  double distance(const CaptionEmbedding& other) const;

  // Scales `raw` to unit L2 norm. Throws PreconditionViolation when the
  // vector is empty, zero, or has non-finite entries.
  static CaptionEmbedding normalized(std::vector<double> raw);
};

// Contiguous run of frames [start, end], 1-based positions within the
// working (sampled) sequence.
struct Event {
  std::size_t start = 1;
  std::size_t end = 1;
  std::string caption;
  std::optional<CaptionEmbedding> embedding;

  std::size_t size() const { return end - start + 1; }

  std::span<const Frame> frames(const FrameSequence& seq) const {
    return std::span<const Frame>(seq.frames).subspan(start - 1, size());
  }
};

}  // namespace videominer

#endif  // VIDEOMINER_EVENT_HPP_
