#include "thermohand/dataset.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thermohand/annotation.hpp"
#include "thermohand/image_io.hpp"

namespace thermohand {

namespace fs = std::filesystem;

Dataset Dataset::load(const std::string& dir, const std::string& split) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("missing dataset manifest: " + manifest_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  Dataset ds;
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("vocabulary"))
    ds.vocab = GestureVocabulary::from_json_text(j["vocabulary"].dump());
  const DatasetManifest manifest = manifest_from_json(text);

  for (const ManifestEntry& e : manifest.entries) {
    if (!split.empty() && e.split != split) continue;
    const fs::path base = fs::path(dir) / "samples" / e.stem;
    Sample s;
    s.image = read_mask_png(base.string() + ".png");
    const Annotation a = read_annotation(base.string() + ".json");
    s.gesture = a.gesture;
    s.handedness = a.handedness;
    s.keypoints = a.keypoints;
    s.meta = {e.stem, e.user, e.seed, e.split};
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty())
    throw std::runtime_error("dataset split '" + split + "' is empty under " + dir);
  return ds;
}

std::vector<const Sample*> Dataset::pointers() const {
  std::vector<const Sample*> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(&s);
  return out;
}

TargetBatch make_targets(const std::vector<const Sample*>& samples, int from, int count,
                         const GestureVocabulary& vocab, const HeatmapConfig& hm_cfg) {
  TargetBatch t;
  t.gesture_onehot.resize(count, kNumGestures, 1, 1);
  t.handedness.resize(count, 1, 1, 1);
  t.heatmaps.resize(count, hm_cfg.channels, hm_cfg.map_size, hm_cfg.map_size);
  for (int i = 0; i < count; ++i) {
    const Sample& s = *samples[from + i];
    t.gesture_onehot.sample(i)[s.gesture.index()] = 1.0f;
    t.handedness.sample(i)[0] = s.handedness == Handedness::Right ? 1.0f : 0.0f;
    const HeatmapStack stack = encode_keypoints(s.keypoints, vocab.mask(s.gesture), hm_cfg);
    std::memcpy(t.heatmaps.sample(i), stack.values.data(),
                sizeof(float) * t.heatmaps.per_sample());
  }
  return t;
}

}  // namespace thermohand
