// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_SYNTH_HPP_
#define VIDEOMINER_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "videominer/mock_clients.hpp"
#include "videominer/surrogate_policy.hpp"
#include "videominer/trainer.hpp"
#include "videominer/tree.hpp"

namespace videominer {

// Mock embedding width used for synthetic runs; 64 dims blur the planted
// caption into its distractors.
inline constexpr std::size_t kSyntheticEmbeddingDim = 256;

// A video of constant-intensity blocks with one planted answer segment.
struct SyntheticSpec {
  std::string source_id = "synthetic";
  std::size_t total_frames = 20;
  std::size_t num_segments = 2;
  std::size_t answer_segment = 0;
  // Frames per segment; empty splits total_frames as evenly as possible.
  std::vector<std::size_t> segment_lengths;
  std::vector<int> intensity_levels{40, 200};
  int noise_amplitude = 4;
  int width = 32;
  int height = 32;
  // Question "Which object appears during the <cue>? (A) .. (B) ..".
  std::string cue = "cooking demonstration";
  std::vector<std::string> options{"kettle", "lamp"};
  std::string gold = "A";
  // Content token per segment; the answer segment carries the gold token.
  std::vector<std::string> segment_tokens{"kettle", "lamp"};
  // Scene phrase per segment, used for the non-answer captions.
  std::vector<std::string> segment_scenes{"", "a quiet hallway"};
  std::uint64_t seed = 0;

  // Errors: SpecInvariantViolation.
  void validate() const;
  std::string question() const;
  // 1-based original index range [first, last] of a segment.
  std::pair<std::int64_t, std::int64_t> segment_range(std::size_t segment) const;

  nlohmann::json to_json() const;
  static SyntheticSpec from_json(const nlohmann::json& doc);
  bool operator==(const SyntheticSpec&) const = default;
};

struct SyntheticInstance {
  SyntheticSpec spec;
  FrameSequence frames;
  std::vector<std::int64_t> planted;  // original indices of the answer segment
  std::string question;
  std::string gold;
  std::vector<ScriptedCaptioner::Entry> captions;

  Episode episode() const;
};

SyntheticInstance generate(const SyntheticSpec& spec);

struct SuiteOptions {
  std::size_t min_segment_frames = 16;
  std::size_t max_segment_frames = 16;
  std::size_t min_segments = 3;
  std::size_t max_segments = 5;
  std::size_t num_options = 4;
  int noise_amplitude = 6;
};

// `count` random valid specs drawn from `seed`.
std::vector<SyntheticSpec> make_suite_specs(std::size_t count, std::uint64_t seed,
                                            const SuiteOptions& options = {});
std::vector<SyntheticInstance> make_suite(std::size_t count, std::uint64_t seed,
                                          const SuiteOptions& options = {});

// Directory layout: suite.json plus instance_NNNN/{manifest.json, frames,
// qa.json}.
void write_suite(const std::filesystem::path& dir, std::span<const SyntheticInstance> suite);
std::vector<SyntheticInstance> read_suite(const std::filesystem::path& dir);

// Surrogate features of a tree node. Errors: MissingEmbedding when the node
// has no embedding, precondition on a node without frames.
Features scripted_policy_features(const TreeNode& node, const CaptionEmbedding& question,
                                  int max_depth);

// Accepts nodes whose caption mentions the question's cue, deletes the rest.
std::shared_ptr<const Policy> make_oracle_policy();

struct EvalReport {
  double keyframe_recall = 0.0;
  double keyframe_precision = 0.0;
  double answer_accuracy = 0.0;
  double mean_nodes_explored = 0.0;
  double mean_depth = 0.0;
  std::size_t instances = 0;

  nlohmann::json to_json() const;
};

// Per-instance results, exposed for inspection.
struct InstanceResult {
  std::uint64_t spec_seed = 0;
  std::string source_id;
  double recall = 0.0;
  double precision = 0.0;
  int correct = 0;
  std::size_t nodes = 0;
  int depth = 0;
};

// Builds one tree per instance with mock embedder, scripted captions and
// the keyword answerer. Each instance samples from sub_seed(seed,
// spec.seed), so results do not depend on suite order.
std::vector<InstanceResult> evaluate_instances(const std::shared_ptr<const Policy>& policy,
                                               std::span<const SyntheticInstance> suite,
                                               const PipelineConfig& cfg, std::uint64_t seed);
EvalReport evaluate(const std::shared_ptr<const Policy>& policy,
                    std::span<const SyntheticInstance> suite, const PipelineConfig& cfg,
                    std::uint64_t seed);

// Offline clients used by synthetic training and evaluation; the captioner
// is left empty because it is per instance.
Clients synthetic_clients(std::shared_ptr<const Policy> policy);

}  // namespace videominer

#endif  // VIDEOMINER_SYNTH_HPP_
