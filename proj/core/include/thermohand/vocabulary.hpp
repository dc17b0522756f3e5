#pragma once

#include <array>
#include <string>

#include "thermohand/types.hpp"

namespace thermohand {

using FingerMask = std::array<bool, kNumFingers>;

/// Mapping from gesture class to which of the five fingers are visible.
/// Wrists are always present for every gesture; the masks only cover fingers.
class GestureVocabulary {
 public:
  /// Built-in vocabulary: ten distinct masks, each with at least one visible
  /// finger. Loadable vocabulary files can override it.
  static GestureVocabulary default_vocabulary();

  /// Parses {"G1": [bool x5], ..., "G10": [...]} from a JSON file.
  static GestureVocabulary load(const std::string& path);
  static GestureVocabulary from_json_text(const std::string& text);

  explicit GestureVocabulary(const std::array<FingerMask, kNumGestures>& masks);

  const FingerMask& mask(GestureClass g) const { return masks_[g.index()]; }
  int visible_count(GestureClass g) const;

  std::string to_json_text() const;
  bool operator==(const GestureVocabulary&) const = default;

 private:
  std::array<FingerMask, kNumGestures> masks_{};
};

}  // namespace thermohand
