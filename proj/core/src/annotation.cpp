#include "thermohand/annotation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace thermohand {

using nlohmann::json;

std::string annotation_to_json(const Annotation& a) {
  json j;
  j["gesture"] = a.gesture.id;
  j["handedness"] = to_string(a.handedness);
  json tips = json::object();
  for (int f = 0; f < kNumFingers; ++f) {
    if (a.keypoints.fingertips[f])
      tips[finger_name(f)] = {a.keypoints.fingertips[f]->x, a.keypoints.fingertips[f]->y};
    else
      tips[finger_name(f)] = nullptr;
  }
  j["fingertips"] = tips;
  j["wrists"] = {{a.keypoints.wrists[0].x, a.keypoints.wrists[0].y},
                 {a.keypoints.wrists[1].x, a.keypoints.wrists[1].y}};
  return j.dump(2);
}

Annotation annotation_from_json(const std::string& text) {
  json j = json::parse(text);
  Annotation a;
  a.gesture = GestureClass(j.at("gesture").get<int>());
  const std::string hand = j.at("handedness").get<std::string>();
  if (hand == "left")
    a.handedness = Handedness::Left;
  else if (hand == "right")
    a.handedness = Handedness::Right;
  else
    throw std::invalid_argument("handedness must be \"left\" or \"right\", got " + hand);

  const json& tips = j.at("fingertips");
  for (int f = 0; f < kNumFingers; ++f) {
    const json& t = tips.at(finger_name(f));
    if (!t.is_null()) a.keypoints.fingertips[f] = Point2{t.at(0).get<double>(), t.at(1).get<double>()};
  }
  const json& wrists = j.at("wrists");
  if (wrists.size() != 2) throw std::invalid_argument("wrists must hold exactly two points");
  for (int i = 0; i < 2; ++i)
    a.keypoints.wrists[i] = Point2{wrists.at(i).at(0).get<double>(), wrists.at(i).at(1).get<double>()};
  return a;
}

void write_annotation(const std::string& path, const Annotation& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write annotation: " + path);
  out << annotation_to_json(a) << "\n";
}

Annotation read_annotation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read annotation: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return annotation_from_json(ss.str());
}

}  // namespace thermohand
