#include "thermohand/vocabulary.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace thermohand {

GestureVocabulary::GestureVocabulary(const std::array<FingerMask, kNumGestures>& masks)
    : masks_(masks) {
  std::set<FingerMask> seen;
  for (int g = 0; g < kNumGestures; ++g) {
    int visible = 0;
    for (bool b : masks_[g]) visible += b ? 1 : 0;
    if (visible == 0)
      throw std::invalid_argument("vocabulary mask for G" + std::to_string(g + 1) +
                                  " has no visible finger");
    if (!seen.insert(masks_[g]).second)
      throw std::invalid_argument("vocabulary masks must be distinct (duplicate at G" +
                                  std::to_string(g + 1) + ")");
  }
}

GestureVocabulary GestureVocabulary::default_vocabulary() {
  // (thumb, index, middle, ring, little)
  return GestureVocabulary({{
      {true, false, false, false, false},   // G1
      {false, true, false, false, false},   // G2
      {false, true, true, false, false},    // G3
      {false, true, true, true, false},     // G4
      {true, true, true, true, true},       // G5
      {true, true, false, false, false},    // G6
      {true, false, false, false, true},    // G7
      {false, true, false, false, true},    // G8
      {true, true, true, false, false},     // G9
      {false, true, true, true, true},      // G10
  }});
}

int GestureVocabulary::visible_count(GestureClass g) const {
  int n = 0;
  for (bool b : masks_[g.index()]) n += b ? 1 : 0;
  return n;
}

GestureVocabulary GestureVocabulary::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("vocabulary file must be a JSON object");
  std::array<FingerMask, kNumGestures> masks{};
  std::array<bool, kNumGestures> present{};
  for (const auto& [key, value] : j.items()) {
    if (key.size() < 2 || key[0] != 'G')
      throw std::invalid_argument("unexpected vocabulary key: " + key);
    int id = std::stoi(key.substr(1));
    if (id < 1 || id > kNumGestures)
      throw std::invalid_argument("vocabulary gesture id out of range: " + key);
    if (!value.is_array() || value.size() != kNumFingers)
      throw std::invalid_argument(key + " must map to a 5-element boolean array");
    for (int f = 0; f < kNumFingers; ++f) masks[id - 1][f] = value[f].get<bool>();
    present[id - 1] = true;
  }
  for (int g = 0; g < kNumGestures; ++g)
    if (!present[g])
      throw std::invalid_argument("vocabulary is missing G" + std::to_string(g + 1));
  return GestureVocabulary(masks);
}

GestureVocabulary GestureVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string GestureVocabulary::to_json_text() const {
  nlohmann::json j = nlohmann::json::object();
  for (int g = 0; g < kNumGestures; ++g) {
    nlohmann::json arr = nlohmann::json::array();
    for (bool b : masks_[g]) arr.push_back(b);
    j["G" + std::to_string(g + 1)] = arr;
  }
  return j.dump(2);
}

}  // namespace thermohand
