#include "thermohand/eval.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "thermohand/refine.hpp"

namespace thermohand {

KeypointMatchResult match_keypoints(const KeypointSet& pred, const KeypointSet& truth,
                                    const MatchConfig& cfg) {
  KeypointMatchResult r;
  for (int f = 0; f < kNumFingers; ++f) {
    const bool pv = pred.fingertips[f].has_value();
    const bool tv = truth.fingertips[f].has_value();
    if (pv && tv) {
      if (distance(*pred.fingertips[f], *truth.fingertips[f]) <= cfg.radius) {
        r.fingertips.tp++;
      } else {
        r.fingertips.fp++;  // a distance miss is both a false detection
        r.fingertips.fn++;  // and a missed truth point
      }
    } else if (pv && !tv) {
      r.fingertips.fp++;
    } else if (!pv && tv) {
      r.fingertips.fn++;
    } else {
      r.fingertips.tn++;
    }
  }

  // Unordered wrist pairing by minimal total distance.
  const double d00 = distance(pred.wrists[0], truth.wrists[0]);
  const double d11 = distance(pred.wrists[1], truth.wrists[1]);
  const double d01 = distance(pred.wrists[0], truth.wrists[1]);
  const double d10 = distance(pred.wrists[1], truth.wrists[0]);
  const bool straight = d00 + d11 <= d01 + d10;
  const double da = straight ? d00 : d01;
  const double db = straight ? d11 : d10;
  for (double d : {da, db}) {
    if (d <= cfg.radius) {
      r.wrists.tp++;
    } else {
      r.wrists.fp++;
      r.wrists.fn++;
    }
  }
  return r;
}

namespace {

TaskMetrics macro_metrics(const std::vector<long>& tp, const std::vector<long>& fp,
                          const std::vector<long>& fn, long correct, long total) {
  TaskMetrics m;
  double recall_sum = 0, prec_sum = 0;
  int recall_n = 0, prec_n = 0;
  for (size_t c = 0; c < tp.size(); ++c) {
    if (tp[c] + fn[c] > 0) {  // class present in truth
      recall_sum += 100.0 * tp[c] / (tp[c] + fn[c]);
      recall_n++;
    }
    if (tp[c] + fp[c] > 0) {  // class predicted at least once
      prec_sum += 100.0 * tp[c] / (tp[c] + fp[c]);
      prec_n++;
    }
  }
  m.recall = recall_n ? recall_sum / recall_n : 0.0;
  m.precision = prec_n ? prec_sum / prec_n : 0.0;
  m.accuracy = total ? 100.0 * correct / total : 0.0;
  return m;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<SamplePrediction>& predictions,
                              const std::vector<const Sample*>& truth, const MatchConfig& cfg) {
  if (predictions.empty() || predictions.size() != truth.size())
    throw std::invalid_argument("every test sample needs exactly one prediction");

  MetricsReport rep;
  rep.n_samples = static_cast<long>(predictions.size());

  std::vector<long> g_tp(kNumGestures, 0), g_fp(kNumGestures, 0), g_fn(kNumGestures, 0);
  std::array<long, kNumGestures> g_total{};
  std::array<long, kNumGestures> g_correct{};
  std::vector<long> h_tp(2, 0), h_fp(2, 0), h_fn(2, 0);
  long g_right = 0, h_right = 0;

  for (size_t i = 0; i < predictions.size(); ++i) {
    const SamplePrediction& p = predictions[i];
    const Sample& t = *truth[i];

    const int tg = t.gesture.index(), pg = p.gesture.index();
    rep.confusion[tg][pg]++;
    g_total[tg]++;
    if (tg == pg) {
      g_tp[tg]++;
      g_correct[tg]++;
      g_right++;
    } else {
      g_fn[tg]++;
      g_fp[pg]++;
    }

    const int th = static_cast<int>(t.handedness), ph = static_cast<int>(p.handedness);
    if (th == ph) {
      h_tp[th]++;
      h_right++;
    } else {
      h_fn[th]++;
      h_fp[ph]++;
    }

    if (p.keypoints_valid) {
      const KeypointMatchResult m = match_keypoints(p.keypoints, t.keypoints, cfg);
      rep.fingertip_counts += m.fingertips;
      rep.wrist_counts += m.wrists;
    } else {
      // Decoding failure: every truth-visible point is missed.
      for (int f = 0; f < kNumFingers; ++f)
        (t.keypoints.fingertips[f] ? rep.fingertip_counts.fn : rep.fingertip_counts.tn)++;
      rep.wrist_counts.fn += 2;
    }
  }

  rep.gesture = macro_metrics(g_tp, g_fp, g_fn, g_right, rep.n_samples);
  rep.handedness = macro_metrics(h_tp, h_fp, h_fn, h_right, rep.n_samples);
  for (int g = 0; g < kNumGestures; ++g)
    rep.per_gesture_accuracy[g] = g_total[g] ? 100.0 * g_correct[g] / g_total[g] : 0.0;

  rep.fingertips = {rep.fingertip_counts.recall(), rep.fingertip_counts.precision(),
                    rep.fingertip_counts.accuracy()};
  rep.wrists = {rep.wrist_counts.recall(), rep.wrist_counts.precision(),
                rep.wrist_counts.accuracy()};
  return rep;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::json j;
  auto task = [](const TaskMetrics& t) {
    return nlohmann::json{{"recall", t.recall}, {"precision", t.precision},
                          {"accuracy", t.accuracy}};
  };
  j["n_samples"] = r.n_samples;
  j["gesture"] = task(r.gesture);
  j["handedness"] = task(r.handedness);
  j["fingertips"] = task(r.fingertips);
  j["wrists"] = task(r.wrists);
  j["per_gesture_accuracy"] = r.per_gesture_accuracy;
  j["fingertip_counts"] = {{"tp", r.fingertip_counts.tp}, {"fp", r.fingertip_counts.fp},
                           {"fn", r.fingertip_counts.fn}, {"tn", r.fingertip_counts.tn}};
  j["wrist_counts"] = {{"tp", r.wrist_counts.tp}, {"fp", r.wrist_counts.fp},
                       {"fn", r.wrist_counts.fn}, {"tn", r.wrist_counts.tn}};
  return j.dump(2);
}

void write_metrics_json(const MetricsReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics_to_json(r) << "\n";
}

void write_metrics_csv(const MetricsReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "task,recall,precision,accuracy\n";
  auto row = [&](const char* name, const TaskMetrics& t) {
    out << name << "," << t.recall << "," << t.precision << "," << t.accuracy << "\n";
  };
  row("gesture", r.gesture);
  row("fingertips", r.fingertips);
  row("wrists", r.wrists);
  row("handedness", r.handedness);
}

void write_confusion_csv(const MetricsReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "truth\\pred";
  for (int g = 1; g <= kNumGestures; ++g) out << ",G" << g;
  out << "\n";
  for (int t = 0; t < kNumGestures; ++t) {
    out << "G" << (t + 1);
    for (int p = 0; p < kNumGestures; ++p) out << "," << r.confusion[t][p];
    out << "\n";
  }
}

net::Tensor make_input_batch(const std::vector<const Sample*>& samples, int from, int count) {
  net::Tensor input(count, 1, kInputSize, kInputSize);
  for (int i = 0; i < count; ++i) {
    const BinaryImage& img = samples[from + i]->image;
    float* dst = input.sample(i);
    for (size_t j = 0; j < img.data.size(); ++j) dst[j] = static_cast<float>(img.data[j]);
  }
  return input;
}

std::vector<SamplePrediction> predict_dataset(net::MultiTaskNet& net,
                                              const std::vector<const Sample*>& samples,
                                              const GestureVocabulary& vocab,
                                              const HeatmapConfig& hm_cfg,
                                              const DecodeConfig& dec_cfg,
                                              const PredictOptions& opts) {
  std::vector<SamplePrediction> predictions;
  predictions.reserve(samples.size());
  const int n = static_cast<int>(samples.size());
  for (int from = 0; from < n; from += opts.batch_size) {
    const int count = std::min(opts.batch_size, n - from);
    const net::Tensor input = make_input_batch(samples, from, count);
    const net::ModelOutputs& out = net.forward(input, net::Mode::Eval);

    for (int i = 0; i < count; ++i) {
      SamplePrediction pred;
      const HeatmapStack stack = net::to_heatmap_stack(out.heatmaps, i);
      std::array<double, kNumGestures> probs;
      for (int g = 0; g < kNumGestures; ++g) probs[g] = out.gesture_probs.sample(i)[g];
      const double hprob = out.handedness_prob.sample(i)[0];

      if (opts.use_refine) {
        try {
          RefineResult res = refine(stack, probs, hprob, vocab, hm_cfg, dec_cfg);
          pred.gesture = res.gesture;
          pred.handedness = res.handedness;
          pred.keypoints = res.keypoints;
        } catch (const CodecError&) {
          // Keep the classification outputs; mark keypoints as failed.
          int best = 0;
          for (int g = 1; g < kNumGestures; ++g)
            if (probs[g] > probs[best]) best = g;
          pred.gesture = GestureClass(best + 1);
          pred.handedness = hprob >= 0.5 ? Handedness::Right : Handedness::Left;
          pred.keypoints_valid = false;
        }
      } else {
        // Threshold baseline: no gesture mask, no misorder correction.
        int best = 0;
        for (int g = 1; g < kNumGestures; ++g)
          if (probs[g] > probs[best]) best = g;
        pred.gesture = GestureClass(best + 1);
        pred.handedness = hprob >= 0.5 ? Handedness::Right : Handedness::Left;
        for (const FingertipDetection& det :
             decode_fingertips_threshold(stack, opts.baseline_threshold))
          pred.keypoints.fingertips[det.finger] = to_input_coords(det.pos, hm_cfg.map_size);
        try {
          auto [w1, w2] = decode_wrists(stack, dec_cfg);
          pred.keypoints.wrists[0] = to_input_coords(w1, hm_cfg.map_size);
          pred.keypoints.wrists[1] = to_input_coords(w2, hm_cfg.map_size);
        } catch (const CodecError&) {
          pred.keypoints_valid = false;
        }
      }
      predictions.push_back(std::move(pred));
    }
  }
  return predictions;
}

}  // namespace thermohand
