// SPDX-License-Identifier: Apache-2.0
#include "star/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "star/error.hpp"

namespace star {
namespace {

constexpr std::array<std::string_view, 3> kQwertyRows = {"qwertyuiop", "asdfghjkl", "zxcvbnm"};
constexpr std::array<double, 3> kRowOffsetInPitches = {0.0, 0.5, 1.0};
constexpr double kTolerance = 1e-9;

bool approx(double a, double b) { return std::abs(a - b) <= kTolerance * std::max(1.0, std::abs(b)); }

bool overlaps(const Key& a, const Key& b) {
  const double dx = std::abs(a.center.x - b.center.x);
  const double dy = std::abs(a.center.y - b.center.y);
  // Shared edges are fine; only interior intersection counts.
  return dx < (a.width + b.width) / 2 - kTolerance && dy < (a.height + b.height) / 2 - kTolerance;
}

struct Preset {
  std::string_view name;
  double width;
  double gap;
};

constexpr std::array<Preset, 2> kPresets = {{{"original", 5.5, 1.0}, {"enlarged", 6.0, 2.0}}};

}  // namespace

double squared_distance(TouchPoint a, TouchPoint b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double distance(TouchPoint a, TouchPoint b) { return std::sqrt(squared_distance(a, b)); }

TouchPoint midpoint(TouchPoint a, TouchPoint b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }

KeyKind kind_of_label(std::string_view label) {
  if (label.size() == 1 && label[0] >= 'a' && label[0] <= 'z') return KeyKind::letter;
  if (label == labels::space) return KeyKind::space;
  if (label == labels::backspace) return KeyKind::backspace;
  if (label == labels::submit) return KeyKind::submit;
  if (label == labels::suggestion0 || label == labels::suggestion1) return KeyKind::suggestion;
  throw data_error("unknown key label '" + std::string(label) + "'");
}

bool Key::contains(TouchPoint p) const {
  return std::abs(p.x - center.x) <= width / 2 && std::abs(p.y - center.y) <= height / 2;
}

KeyboardLayout::KeyboardLayout(std::string name, std::vector<Key> keys, double key_gap,
                               double column_pitch, double row_pitch, TouchPoint origin)
    : name_(std::move(name)),
      keys_(std::move(keys)),
      key_gap_(key_gap),
      column_pitch_(column_pitch),
      row_pitch_(row_pitch),
      origin_(origin) {
  if (!(key_gap_ >= 0) || !(column_pitch_ > 0) || !(row_pitch_ > 0))
    throw data_error("layout '" + name_ + "': gap must be >= 0 and pitches > 0");

  std::set<std::string, std::less<>> seen;
  letter_index_.fill(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const Key& k = keys_[i];
    if (!(k.width > 0) || !(k.height > 0))
      throw data_error("layout '" + name_ + "': key '" + k.label + "' has non-positive size");
    if (!std::isfinite(k.center.x) || !std::isfinite(k.center.y))
      throw data_error("layout '" + name_ + "': key '" + k.label + "' has a non-finite centre");
    if (!seen.insert(k.label).second)
      throw data_error("layout '" + name_ + "': duplicate key label '" + k.label + "'");
    if (k.is_letter()) letter_index_[k.label[0] - 'a'] = i;
  }
  for (int c = 0; c < 26; ++c) {
    if (letter_index_[c] == keys_.size())
      throw data_error("layout '" + name_ + "': missing letter '" + std::string(1, char('a' + c)) + "'");
  }
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    for (std::size_t j = i + 1; j < keys_.size(); ++j) {
      if (overlaps(keys_[i], keys_[j]))
        throw data_error("layout '" + name_ + "': keys '" + keys_[i].label + "' and '" +
                         keys_[j].label + "' overlap");
    }
  }

  const Key& q = key("q");
  if (!approx(column_pitch_, q.width + key_gap_))
    throw data_error("layout '" + name_ + "': column pitch must equal key width + gap");
  for (std::size_t row = 0; row < kQwertyRows.size(); ++row) {
    for (std::size_t col = 0; col < kQwertyRows[row].size(); ++col) {
      const Key& k = key(std::string_view(&kQwertyRows[row][col], 1));
      const double x = origin_.x + (kRowOffsetInPitches[row] + double(col)) * column_pitch_;
      const double y = origin_.y + double(row) * row_pitch_;
      if (!approx(k.center.x, x) || !approx(k.center.y, y) || !approx(k.width, q.width) ||
          !approx(k.height, q.height))
        throw data_error("layout '" + name_ + "': letter '" + k.label + "' is off the QWERTY grid");
    }
  }
  for (auto label : {labels::suggestion0, labels::suggestion1}) {
    const Key* s = find(label);
    if (s == nullptr) throw data_error("layout '" + name_ + "': missing " + std::string(label));
    if (!approx(s->center.y, origin_.y - row_pitch_))
      throw data_error("layout '" + name_ + "': " + std::string(label) + " must sit one row above 'q'");
  }
  if (!(find(labels::suggestion0)->center.x < find(labels::suggestion1)->center.x))
    throw data_error("layout '" + name_ + "': suggestion-0 must be left of suggestion-1");
}

double KeyboardLayout::key_width() const { return key("q").width; }
double KeyboardLayout::key_height() const { return key("q").height; }

const Key* KeyboardLayout::find(std::string_view label) const {
  auto it = std::find_if(keys_.begin(), keys_.end(), [&](const Key& k) { return k.label == label; });
  return it == keys_.end() ? nullptr : &*it;
}

const Key& KeyboardLayout::key(std::string_view label) const {
  if (const Key* k = find(label)) return *k;
  throw data_error("layout '" + name_ + "' has no key '" + std::string(label) + "'");
}

KeyboardLayout build_layout(std::string_view name, const LayoutDimensions& overrides) {
  double width = 0;
  double gap = 0;
  auto preset = std::find_if(kPresets.begin(), kPresets.end(), [&](const Preset& p) { return p.name == name; });
  if (preset != kPresets.end()) {
    width = overrides.key_width.value_or(preset->width);
    gap = overrides.key_gap.value_or(preset->gap);
  } else {
    if (!overrides.key_width || !overrides.key_gap)
      throw usage_error("unknown layout preset '" + std::string(name) +
                        "' (custom layouts need key width and gap)");
    width = *overrides.key_width;
    gap = *overrides.key_gap;
  }
  const double height = overrides.key_height.value_or(width);
  if (!(width > 0) || !(height > 0) || !(gap >= 0))
    throw usage_error("layout dimensions must be positive");

  const double pitch = width + gap;
  const double row_pitch = overrides.row_pitch.value_or(height + gap);
  if (!(row_pitch >= height)) throw usage_error("row pitch must be at least the key height");

  std::vector<Key> keys;
  for (std::size_t row = 0; row < kQwertyRows.size(); ++row) {
    for (std::size_t col = 0; col < kQwertyRows[row].size(); ++col) {
      keys.push_back({std::string(1, kQwertyRows[row][col]),
                      {(kRowOffsetInPitches[row] + double(col)) * pitch, double(row) * row_pitch},
                      width,
                      height});
    }
  }

  // Backspace fills the slot right of 'm' (columns 8..9 of row 3). The bottom
  // row holds the space bar under columns 2..6 and submit under backspace.
  const double row3 = 2 * row_pitch;
  const double row4 = 3 * row_pitch;
  keys.push_back({std::string(labels::backspace), {8.5 * pitch, row3}, 2 * pitch - gap, height});
  keys.push_back({std::string(labels::space), {4.0 * pitch, row4}, 5 * pitch - gap, height});
  keys.push_back({std::string(labels::submit), {8.5 * pitch, row4}, 2 * pitch - gap, height});

  // Two suggestion buttons, each half the letter-block width, one row above 'q'.
  const double left = -width / 2;
  const double right = 9 * pitch + width / 2;
  const double button = (right - left - gap) / 2;
  keys.push_back({std::string(labels::suggestion0), {left + button / 2, -row_pitch}, button, height});
  keys.push_back({std::string(labels::suggestion1), {right - button / 2, -row_pitch}, button, height});

  return KeyboardLayout(std::string(name), std::move(keys), gap, pitch, row_pitch, {0.0, 0.0});
}

const Key& nearest_key(const KeyboardLayout& layout, TouchPoint p, KeyFilter filter) {
  const Key* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const Key& k : layout.keys()) {
    if (filter == KeyFilter::letters && !k.is_letter()) continue;
    const double d2 = squared_distance(p, k.center);
    if (best == nullptr || d2 < best_d2 || (d2 == best_d2 && k.label < best->label)) {
      best = &k;
      best_d2 = d2;
    }
  }
  return *best;
}

TouchPoint key_center(const KeyboardLayout& layout, std::string_view label) {
  return layout.key(label).center;
}

const Key& register_tap(const KeyboardLayout& layout, TouchPoint p) {
  for (const Key& k : layout.keys()) {
    if (!k.is_letter() && k.contains(p)) return k;
  }
  return nearest_key(layout, p, KeyFilter::letters);
}

nlohmann::json layout_to_json(const KeyboardLayout& layout) {
  nlohmann::json keys = nlohmann::json::array();
  for (const Key& k : layout.keys()) {
    keys.push_back({{"label", k.label},
                    {"center", {k.center.x, k.center.y}},
                    {"width", k.width},
                    {"height", k.height}});
  }
  return {{"name", layout.name()},
          {"units", "mm"},
          {"key_width", layout.key_width()},
          {"key_height", layout.key_height()},
          {"key_gap", layout.key_gap()},
          {"column_pitch", layout.column_pitch()},
          {"row_pitch", layout.row_pitch()},
          {"origin", {layout.origin().x, layout.origin().y}},
          {"keys", std::move(keys)}};
}

KeyboardLayout layout_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Key> keys;
    for (const auto& k : doc.at("keys")) {
      keys.push_back({k.at("label").get<std::string>(),
                      {k.at("center").at(0).get<double>(), k.at("center").at(1).get<double>()},
                      k.at("width").get<double>(),
                      k.at("height").get<double>()});
    }
    const auto& origin = doc.at("origin");
    return KeyboardLayout(doc.at("name").get<std::string>(), std::move(keys),
                          doc.at("key_gap").get<double>(), doc.at("column_pitch").get<double>(),
                          doc.at("row_pitch").get<double>(),
                          {origin.at(0).get<double>(), origin.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed layout document: ") + e.what());
  }
}

void save_layout(const KeyboardLayout& layout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write layout file " + path);
  out << layout_to_json(layout).dump(2) << '\n';
}

KeyboardLayout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open layout file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("layout file " + path + ": " + e.what());
  }
  return layout_from_json(doc);
}

KeyboardLayout resolve_layout(const std::string& name_or_path) {
  for (const Preset& p : kPresets) {
    if (p.name == name_or_path) return build_layout(p.name);
  }
  return load_layout_file(name_or_path);
}

}  // namespace star
