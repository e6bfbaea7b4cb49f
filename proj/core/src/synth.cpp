// SPDX-License-Identifier: Apache-2.0

#include "videominer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "videominer/image_io.hpp"
#include "videominer/rng.hpp"

namespace videominer {
namespace {

using nlohmann::json;

constexpr const char* kCues[] = {
    "cooking demonstration", "garden tour",     "birthday party", "chess match",
    "piano lesson",          "morning jog",     "market visit",   "river crossing",
    "museum walk",           "kitchen cleanup", "harbor sunset",  "library study"};

constexpr const char* kScenes[] = {
    "a quiet hallway", "an empty street", "a crowded bus",  "a dim stairwell",
    "an office desk",  "a parked car",    "a rainy window", "a snowy field",
    "a wooden bench",  "a tiled floor"};

constexpr const char* kObjects[] = {
    "lamp",   "kettle", "bicycle", "umbrella", "guitar", "basket", "helmet",  "camera",
    "clock",  "ladder", "teapot",  "scarf",    "compass", "lantern", "violin", "backpack"};

[[noreturn]] void violation(const std::string& what) {
  fail(ErrorCode::kSpecInvariantViolation, "synthetic spec: " + what);
}

template <typename T, std::size_t N>
std::vector<T> pick_distinct(Rng& rng, const T (&pool)[N], std::size_t count) {
  std::vector<T> items(std::begin(pool), std::end(pool));
  // Partial Fisher-Yates with our own uniform draws.
  for (std::size_t i = 0; i < count && i < items.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(std::min(count, items.size()));
  return items;
}

std::string planted_caption(const SyntheticSpec& spec) {
  return "a " + spec.segment_tokens[spec.answer_segment] + " appears during the " + spec.cue;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_segments < 1) violation("num_segments must be >= 1");
  if (answer_segment >= num_segments) violation("answer_segment must be < num_segments");
  if (total_frames < num_segments) violation("total_frames must be >= num_segments");
  if (!segment_lengths.empty()) {
    if (segment_lengths.size() != num_segments) violation("one length per segment");
    std::size_t sum = 0;
    for (std::size_t len : segment_lengths) {
      if (len == 0) violation("segment lengths must be positive");
      sum += len;
    }
    if (sum != total_frames) violation("segment lengths must add up to total_frames");
  }
  if (width < 1 || height < 1) violation("frame size must be positive");
  if (noise_amplitude < 0) violation("noise_amplitude must be >= 0");
  if (intensity_levels.size() != num_segments) violation("one intensity level per segment");
  if (segment_tokens.size() != num_segments) violation("one token per segment");
  if (segment_scenes.size() != num_segments) violation("one scene phrase per segment");
  for (int level : intensity_levels) {
    if (level < 0 || level > 255) violation("intensity levels must lie in [0, 255]");
  }
  for (std::size_t i = 0; i < num_segments; ++i) {
    for (std::size_t j = i + 1; j < num_segments; ++j) {
      const int gap = std::abs(intensity_levels[i] - intensity_levels[j]);
      if (gap == 0 || gap < 4 * noise_amplitude) {
        violation("levels " + std::to_string(i) + " and " + std::to_string(j) +
                  " are closer than 4x noise_amplitude");
      }
    }
  }
  if (cue.empty()) violation("cue must be nonempty");
  if (options.size() < 2 || options.size() > 26) violation("between 2 and 26 options");
  if (gold.size() != 1 || gold[0] < 'A' || gold[0] >= 'A' + static_cast<int>(options.size())) {
    violation("gold must be one of the option letters");
  }
  if (segment_tokens[answer_segment] != options[static_cast<std::size_t>(gold[0] - 'A')]) {
    violation("the answer segment must carry the gold option's token");
  }
}

std::string SyntheticSpec::question() const {
  std::string q = "Which object appears during the " + cue + "?";
  for (std::size_t i = 0; i < options.size(); ++i) {
    q += " (";
    q += static_cast<char>('A' + i);
    q += ") " + options[i];
  }
  return q;
}

std::pair<std::int64_t, std::int64_t> SyntheticSpec::segment_range(std::size_t segment) const {
  require(segment < num_segments, "segment out of range");
  if (!segment_lengths.empty()) {
    std::size_t first = 1;
    for (std::size_t s = 0; s < segment; ++s) first += segment_lengths[s];
    return {static_cast<std::int64_t>(first),
            static_cast<std::int64_t>(first + segment_lengths[segment] - 1)};
  }
  const std::size_t base = total_frames / num_segments;
  const std::size_t extra = total_frames % num_segments;
  const std::size_t first = segment * base + std::min(segment, extra);
  const std::size_t len = base + (segment < extra ? 1 : 0);
  return {static_cast<std::int64_t>(first + 1), static_cast<std::int64_t>(first + len)};
}

json SyntheticSpec::to_json() const {
  return {{"source_id", source_id},
          {"total_frames", total_frames},
          {"num_segments", num_segments},
          {"answer_segment", answer_segment},
          {"segment_lengths", segment_lengths},
          {"intensity_levels", intensity_levels},
          {"noise_amplitude", noise_amplitude},
          {"width", width},
          {"height", height},
          {"cue", cue},
          {"options", options},
          {"gold", gold},
          {"segment_tokens", segment_tokens},
          {"segment_scenes", segment_scenes},
          {"seed", seed}};
}

SyntheticSpec SyntheticSpec::from_json(const json& doc) {
  SyntheticSpec spec;
  try {
    spec.source_id = doc.at("source_id").get<std::string>();
    spec.total_frames = doc.at("total_frames").get<std::size_t>();
    spec.num_segments = doc.at("num_segments").get<std::size_t>();
    spec.answer_segment = doc.at("answer_segment").get<std::size_t>();
    spec.segment_lengths = doc.at("segment_lengths").get<std::vector<std::size_t>>();
    spec.intensity_levels = doc.at("intensity_levels").get<std::vector<int>>();
    spec.noise_amplitude = doc.at("noise_amplitude").get<int>();
    spec.width = doc.at("width").get<int>();
    spec.height = doc.at("height").get<int>();
    spec.cue = doc.at("cue").get<std::string>();
    spec.options = doc.at("options").get<std::vector<std::string>>();
    spec.gold = doc.at("gold").get<std::string>();
    spec.segment_tokens = doc.at("segment_tokens").get<std::vector<std::string>>();
    spec.segment_scenes = doc.at("segment_scenes").get<std::vector<std::string>>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("synthetic spec: ") + e.what());
  }
  return spec;
}

Episode SyntheticInstance::episode() const {
  return Episode{frames, question, gold, std::make_shared<ScriptedCaptioner>(captions)};
}

SyntheticInstance generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticInstance out;
  out.spec = spec;
  out.question = spec.question();
  out.gold = spec.gold;
  out.frames.source_id = spec.source_id;
  out.frames.original_count = spec.total_frames;

  Rng rng(spec.seed);
  const int a = spec.noise_amplitude;
  const std::size_t pixels = static_cast<std::size_t>(spec.width) * spec.height;
  for (std::size_t s = 0; s < spec.num_segments; ++s) {
    const auto [first, last] = spec.segment_range(s);
    for (std::int64_t index = first; index <= last; ++index) {
      Frame frame;
      frame.index = index;
      frame.width = spec.width;
      frame.height = spec.height;
      frame.pixels.resize(pixels);
      for (auto& p : frame.pixels) {
        const int jitter = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * a + 1))) - a;
        p = static_cast<std::uint8_t>(std::clamp(spec.intensity_levels[s] + jitter, 0, 255));
      }
      out.frames.frames.push_back(std::move(frame));
      if (s == spec.answer_segment) out.planted.push_back(index);
    }
    const std::string text = s == spec.answer_segment
                                 ? planted_caption(spec)
                                 : spec.segment_scenes[s] + " with a " + spec.segment_tokens[s];
    out.captions.push_back({first, last, text});
  }
  return out;
}

std::vector<SyntheticSpec> make_suite_specs(std::size_t count, std::uint64_t seed,
                                            const SuiteOptions& options) {
  require(options.min_segments >= 1 && options.min_segments <= options.max_segments,
          "suite needs 1 <= min_segments <= max_segments");
  require(options.min_segment_frames >= 1 &&
              options.min_segment_frames <= options.max_segment_frames,
          "suite needs 1 <= min_segment_frames <= max_segment_frames");
  require(options.num_options >= 2 && options.num_options <= std::size(kObjects),
          "suite option count out of range");
  require(options.max_segments <= std::size(kScenes) + 1, "too many segments for the vocabulary");
  const int step = std::max(4 * options.noise_amplitude, 1);
  std::vector<int> grid;
  for (int level = 10 + options.noise_amplitude; level <= 245 - options.noise_amplitude;
       level += step) {
    grid.push_back(level);
  }
  require(grid.size() >= options.max_segments, "noise too large for distinct levels");

  std::vector<SyntheticSpec> specs;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(sub_seed(seed, i, 1));
    SyntheticSpec spec;
    char name[32];
    std::snprintf(name, sizeof name, "synthetic_%04zu", i);
    spec.source_id = name;
    spec.seed = sub_seed(seed, i, 2);
    spec.num_segments = options.min_segments +
                        rng.below(options.max_segments - options.min_segments + 1);
    spec.segment_lengths.resize(spec.num_segments);
    spec.total_frames = 0;
    for (auto& len : spec.segment_lengths) {
      len = options.min_segment_frames +
            rng.below(options.max_segment_frames - options.min_segment_frames + 1);
      spec.total_frames += len;
    }
    spec.answer_segment = rng.below(spec.num_segments);
    spec.noise_amplitude = options.noise_amplitude;
    spec.cue = kCues[rng.below(std::size(kCues))];

    std::vector<int> levels(grid.begin(), grid.end());
    const int grid_pool_size = static_cast<int>(levels.size());
    for (std::size_t k = 0; k < spec.num_segments; ++k) {
      const std::size_t j = k + rng.below(static_cast<std::uint64_t>(grid_pool_size) - k);
      std::swap(levels[k], levels[j]);
    }
    spec.intensity_levels.assign(levels.begin(), levels.begin() + spec.num_segments);

    const auto objects = pick_distinct(rng, kObjects, std::size(kObjects));
    spec.options.assign(objects.begin(), objects.begin() + options.num_options);
    const std::size_t gold = rng.below(options.num_options);
    spec.gold = std::string(1, static_cast<char>('A' + gold));

    const auto scenes = pick_distinct(rng, kScenes, std::size(kScenes));
    std::size_t neutral = options.num_options;
    spec.segment_tokens.assign(spec.num_segments, "");
    spec.segment_scenes.assign(spec.num_segments, "");
    for (std::size_t s = 0; s < spec.num_segments; ++s) {
      spec.segment_scenes[s] = scenes[s];
      if (s == spec.answer_segment) {
        spec.segment_tokens[s] = spec.options[gold];
      } else if (rng.uniform() < 0.5) {
        // Distractor naming a wrong option.
        std::size_t wrong = rng.below(options.num_options - 1);
        if (wrong >= gold) ++wrong;
        spec.segment_tokens[s] = spec.options[wrong];
      } else {
        spec.segment_tokens[s] = objects[neutral++ % objects.size()];
      }
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<SyntheticInstance> make_suite(std::size_t count, std::uint64_t seed,
                                          const SuiteOptions& options) {
  std::vector<SyntheticInstance> suite;
  for (const auto& spec : make_suite_specs(count, seed, options)) suite.push_back(generate(spec));
  return suite;
}

void write_suite(const std::filesystem::path& dir, std::span<const SyntheticInstance> suite) {
  std::filesystem::create_directories(dir);
  json names = json::array();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const SyntheticInstance& inst = suite[i];
    char name[32];
    std::snprintf(name, sizeof name, "instance_%04zu", i);
    const auto sub = dir / name;
    std::filesystem::create_directories(sub);

    VideoManifest manifest;
    manifest.metadata["source_id"] = inst.spec.source_id;
    for (const Frame& frame : inst.frames.frames) {
      char file[32];
      std::snprintf(file, sizeof file, "frame_%04lld.pgm", static_cast<long long>(frame.index));
      write_pgm(sub / file, frame);
      manifest.entries.push_back({file, frame.index});
    }
    write_manifest(sub / "manifest.json", manifest);

    json captions = json::array();
    for (const auto& e : inst.captions) {
      captions.push_back({{"first", e.first}, {"last", e.last}, {"text", e.text}});
    }
    write_json(sub / "qa.json", {{"question", inst.question},
                                 {"gold", inst.gold},
                                 {"planted", inst.planted},
                                 {"captions", std::move(captions)},
                                 {"spec", inst.spec.to_json()}});
    names.push_back(name);
  }
  write_json(dir / "suite.json", {{"instances", std::move(names)}});
}

std::vector<SyntheticInstance> read_suite(const std::filesystem::path& dir) {
  const json index = read_json(dir / "suite.json");
  std::vector<SyntheticInstance> suite;
  try {
    for (const auto& name : index.at("instances")) {
      const auto sub = dir / name.get<std::string>();
      const json qa = read_json(sub / "qa.json");
      SyntheticInstance inst;
      inst.spec = SyntheticSpec::from_json(qa.at("spec"));
      inst.question = qa.at("question").get<std::string>();
      inst.gold = qa.at("gold").get<std::string>();
      inst.planted = qa.at("planted").get<std::vector<std::int64_t>>();
      for (const auto& e : qa.at("captions")) {
        inst.captions.push_back({e.at("first").get<std::int64_t>(),
                                 e.at("last").get<std::int64_t>(),
                                 e.at("text").get<std::string>()});
      }
      inst.frames = load_frames(read_manifest(sub / "manifest.json"));
      inst.frames.original_count = inst.spec.total_frames;
      suite.push_back(std::move(inst));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, (dir / "suite.json").string() + ": " + e.what());
  }
  return suite;
}

Features scripted_policy_features(const TreeNode& node, const CaptionEmbedding& question,
                                  int max_depth) {
  if (!node.embedding) {
    fail(ErrorCode::kMissingEmbedding, "node " + std::to_string(node.id) + " has no embedding");
  }
  PolicyDecisionRequest request;
  request.depth = node.depth;
  request.max_depth = max_depth;
  request.frame_count = node.frame_count();
  request.caption_embedding = node.embedding;
  request.question_embedding = question;
  return policy_features(request);
}

std::shared_ptr<const Policy> make_oracle_policy() {
  return std::make_shared<ScriptedPolicy>([](const PolicyDecisionRequest& request) {
    const std::string marker = "during the ";
    const auto at = request.question.find(marker);
    std::string cue;
    if (at != std::string::npos) {
      const auto begin = at + marker.size();
      cue = request.question.substr(begin, request.question.find('?', begin) - begin);
    }
    const bool relevant = !cue.empty() && request.caption.find(cue) != std::string::npos;
    return format_node_text("oracle", relevant ? Action::kAccept : Action::kDelete);
  });
}

Clients synthetic_clients(std::shared_ptr<const Policy> policy) {
  Clients clients;
  clients.embedder = std::make_shared<MockEmbedder>(kSyntheticEmbeddingDim);
  clients.policy = std::move(policy);
  clients.answerer = std::make_shared<KeywordAnswerer>();
  return clients;
}

nlohmann::json EvalReport::to_json() const {
  return {{"keyframe_recall", keyframe_recall},
          {"keyframe_precision", keyframe_precision},
          {"answer_accuracy", answer_accuracy},
          {"mean_nodes_explored", mean_nodes_explored},
          {"mean_depth", mean_depth},
          {"instances", instances}};
}

std::vector<InstanceResult> evaluate_instances(const std::shared_ptr<const Policy>& policy,
                                               std::span<const SyntheticInstance> suite,
                                               const PipelineConfig& cfg, std::uint64_t seed) {
  require(!suite.empty(), "evaluation needs at least one instance");
  require(policy != nullptr, "evaluation needs a policy");
  const Clients base = synthetic_clients(policy);
  std::vector<InstanceResult> results;
  for (const SyntheticInstance& inst : suite) {
    Clients clients = base;
    clients.captioner = std::make_shared<ScriptedCaptioner>(inst.captions);
    VideoTree tree =
        build_tree(inst.frames, inst.question, clients, cfg, sub_seed(seed, inst.spec.seed));

    InstanceResult r;
    r.spec_seed = inst.spec.seed;
    r.source_id = inst.spec.source_id;
    r.nodes = tree.decided_count();
    r.depth = tree.max_decided_depth();
    try {
      assign_keyframes(tree, cfg.exploration);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoKeyframes) throw;
      results.push_back(r);
      continue;
    }
    const std::set<std::int64_t> planted(inst.planted.begin(), inst.planted.end());
    const std::set<std::int64_t> selected(tree.keyframes.begin(), tree.keyframes.end());
    std::size_t hit = 0;
    for (std::int64_t p : planted) {
      if (selected.count(p - 1) || selected.count(p) || selected.count(p + 1)) ++hit;
    }
    std::size_t exact = 0;
    for (std::int64_t s : selected) exact += planted.count(s);
    r.recall = planted.empty() ? 0.0 : static_cast<double>(hit) / planted.size();
    r.precision = static_cast<double>(exact) / selected.size();
    r.correct = tree_reward(final_answer(tree, *clients.answerer), inst.gold);
    results.push_back(r);
  }
  return results;
}

EvalReport evaluate(const std::shared_ptr<const Policy>& policy,
                    std::span<const SyntheticInstance> suite, const PipelineConfig& cfg,
                    std::uint64_t seed) {
  auto results = evaluate_instances(policy, suite, cfg, seed);
  // Fixed summation order keeps the report independent of suite order.
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.spec_seed, a.source_id) < std::tie(b.spec_seed, b.source_id);
  });
  EvalReport report;
  report.instances = results.size();
  for (const auto& r : results) {
    report.keyframe_recall += r.recall;
    report.keyframe_precision += r.precision;
    report.answer_accuracy += r.correct;
    report.mean_nodes_explored += static_cast<double>(r.nodes);
    report.mean_depth += r.depth;
  }
  const double n = static_cast<double>(results.size());
  report.keyframe_recall /= n;
  report.keyframe_precision /= n;
  report.answer_accuracy /= n;
  report.mean_nodes_explored /= n;
  report.mean_depth /= n;
  return report;
}

}  // namespace videominer
