#include "semvol/presets.hpp"

#include <initializer_list>
#include <string>

namespace semvol::presets {

namespace {

std::vector<CompoundTerm> make(std::initializer_list<const char*> names) {
  std::vector<CompoundTerm> out;
  out.reserve(names.size());
  for (const char* n : names) out.push_back(CompoundTerm::parse(n));
  return out;
}

}  // namespace

// Keep in sync with data/seeds/*.txt (checked by test_presets).
std::vector<CompoundTerm> joints17() {
  return make({"nose", "left eye", "right eye", "left ear", "right ear", "left shoulder",
               "right shoulder", "left elbow", "right elbow", "left wrist", "right wrist",
               "left hip", "right hip", "left knee", "right knee", "left ankle",
               "right ankle"});
}

std::vector<CompoundTerm> joints32() {
  return make({"pelvis",         "spine navel",    "spine chest",   "neck",
               "left clavicle",  "left shoulder",  "left elbow",    "left wrist",
               "left hand",      "left hand tip",  "left thumb",    "right clavicle",
               "right shoulder", "right elbow",    "right wrist",   "right hand",
               "right hand tip", "right thumb",    "left hip",      "left knee",
               "left ankle",     "left foot",      "right hip",     "right knee",
               "right ankle",    "right foot",     "head",          "nose",
               "left eye",       "left ear",       "right eye",     "right ear"});
}

std::vector<CompoundTerm> objects7() {
  return make({"table top", "leg", "shelf", "side panel", "front panel", "bottom panel",
               "rear panel"});
}

std::vector<CompoundTerm> objects12() {
  return make({"cabinet foot", "cabinet door", "cabinet wall", "cabinet board", "screwdriver",
               "wrench", "hammer", "drill", "screw", "hinge", "bracket", "manual"});
}

std::optional<std::vector<CompoundTerm>> class_list(std::string_view name) {
  std::string_view skeleton = name;
  std::string_view objects;
  if (auto plus = name.find('+'); plus != std::string_view::npos) {
    skeleton = name.substr(0, plus);
    objects = name.substr(plus + 1);
  }
  std::vector<CompoundTerm> out;
  if (skeleton == "17") {
    out = joints17();
  } else if (skeleton == "32") {
    out = joints32();
  } else {
    return std::nullopt;
  }
  if (objects == "7") {
    auto o = objects7();
    out.insert(out.end(), o.begin(), o.end());
  } else if (objects == "12") {
    auto o = objects12();
    out.insert(out.end(), o.begin(), o.end());
  } else if (!objects.empty()) {
    return std::nullopt;
  }
  return out;
}

}  // namespace semvol::presets
