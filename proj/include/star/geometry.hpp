// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace star {

/// A point on the keyboard plane in millimetres. Origin is the centre of
/// 'q', +x to the right, +y downwards.
struct TouchPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TouchPoint&, const TouchPoint&) = default;
};

inline TouchPoint operator+(TouchPoint a, TouchPoint b) { return {a.x + b.x, a.y + b.y}; }
inline TouchPoint operator-(TouchPoint a, TouchPoint b) { return {a.x - b.x, a.y - b.y}; }
inline TouchPoint operator*(double s, TouchPoint p) { return {s * p.x, s * p.y}; }

double squared_distance(TouchPoint a, TouchPoint b);
double distance(TouchPoint a, TouchPoint b);
TouchPoint midpoint(TouchPoint a, TouchPoint b);

enum class KeyKind : std::uint8_t { letter, space, backspace, submit, suggestion };

/// Key label constants for the non-letter keys.
namespace labels {
inline constexpr std::string_view space = "space";
inline constexpr std::string_view backspace = "backspace";
inline constexpr std::string_view submit = "submit";
inline constexpr std::string_view suggestion0 = "suggestion-0";
inline constexpr std::string_view suggestion1 = "suggestion-1";
}  // namespace labels

KeyKind kind_of_label(std::string_view label);

struct Key {
  std::string label;
  TouchPoint center;
  double width = 0.0;
  double height = 0.0;

  KeyKind kind() const { return kind_of_label(label); }
  bool contains(TouchPoint p) const;
  bool is_letter() const { return kind() == KeyKind::letter; }
  /// The letter for letter keys, '\0' otherwise.
  char letter() const { return is_letter() ? label.front() : '\0'; }
};

/// Which keys a lookup may return.
enum class KeyFilter : std::uint8_t { letters, all };

/// Dimension overrides for build_layout. Any unset field falls back to the
/// preset (or, for height and row pitch, to the square-key convention).
struct LayoutDimensions {
  std::optional<double> key_width;
  std::optional<double> key_gap;
  std::optional<double> key_height;
  std::optional<double> row_pitch;
};

/// Virtual QWERTY keyboard in millimetre coordinates. Immutable once built.
class KeyboardLayout {
 public:
  /// Validates every layout invariant; throws star::Error (data) on failure.
  KeyboardLayout(std::string name, std::vector<Key> keys, double key_gap, double column_pitch,
                 double row_pitch, TouchPoint origin);

  const std::string& name() const { return name_; }
  std::span<const Key> keys() const { return keys_; }
  double key_gap() const { return key_gap_; }
  double column_pitch() const { return column_pitch_; }
  double row_pitch() const { return row_pitch_; }
  TouchPoint origin() const { return origin_; }
  /// Width of the 'q' key; all letter keys share it.
  double key_width() const;
  double key_height() const;

  const Key* find(std::string_view label) const;
  const Key& key(std::string_view label) const;
  /// Letter keys indexed 0..25 for 'a'..'z'.
  const Key& letter_key(int index) const { return keys_[letter_index_[index]]; }

 private:
  std::string name_;
  std::vector<Key> keys_;
  double key_gap_;
  double column_pitch_;
  double row_pitch_;
  TouchPoint origin_;
  std::array<std::size_t, 26> letter_index_{};
};

/// Known presets: "original" (5.5 mm keys, 1 mm gap) and "enlarged" (6 mm
/// keys, 2 mm gap). A custom name requires key_width and key_gap overrides.
KeyboardLayout build_layout(std::string_view name, const LayoutDimensions& overrides = {});

/// Nearest key centre among keys selected by the filter. Ties go to the
/// lexicographically smaller label.
const Key& nearest_key(const KeyboardLayout& layout, TouchPoint p,
                       KeyFilter filter = KeyFilter::letters);

TouchPoint key_center(const KeyboardLayout& layout, std::string_view label);

/// Tap registration used by sessions: a touch inside a control key
/// (space, backspace, submit, suggestion) registers that control;
/// anything else registers the nearest letter centre.
const Key& register_tap(const KeyboardLayout& layout, TouchPoint p);

nlohmann::json layout_to_json(const KeyboardLayout& layout);
KeyboardLayout layout_from_json(const nlohmann::json& doc);
void save_layout(const KeyboardLayout& layout, const std::string& path);
KeyboardLayout load_layout_file(const std::string& path);
/// A preset name or a path to a layout document.
KeyboardLayout resolve_layout(const std::string& name_or_path);

}  // namespace star
