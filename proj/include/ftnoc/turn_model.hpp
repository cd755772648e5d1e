// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bitset>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ftnoc/geometry.hpp"

namespace ftnoc {

/// A 90-degree connection from an input port side to an output port side.
struct Turn {
  Direction in;
  Direction out;

  friend constexpr bool operator==(const Turn&, const Turn&) = default;
};

inline constexpr int kTurnSlots2d = 8;
inline constexpr int kTurnSlots3d = 24;

/// Fixed slot layout shared by the SHM, LBDR bits and fault tags.
/// Slots 0..7 are the planar turns N→E, N→W, S→E, S→W, E→N, E→S, W→N, W→S
/// (input side → output side); 8..23 are the vertical turns of a 3D router.
std::span<const Turn> turn_slots(bool three_d);
std::optional<int> turn_slot(Direction in, Direction out, bool three_d);

/// Straight-through connection (e.g. W-in → E-out): never a turn.
constexpr bool is_straight(Direction in, Direction out) {
  return in != Direction::L && out == opposite(in);
}

/// Routing algorithm described purely by its allowed turn set.
class TurnModel {
 public:
  TurnModel() = default;
  TurnModel(std::string name, std::bitset<kTurnSlots3d> allowed)
      : name_(std::move(name)), allowed_(allowed) {}

  static TurnModel xy();
  static TurnModel west_first();
  static TurnModel north_last();
  static TurnModel negative_first();
  /// Dimension order X, then Y, then Z for 3D meshes.
  static TurnModel xyz();
  /// Every turn allowed. Not deadlock free; used as a negative control.
  static TurnModel fully_adaptive();

  /// Throws ConfigError for pairs that are not 90-degree turns.
  static TurnModel from_turns(std::string name, const std::vector<Turn>& turns);
  /// Looks up one of the named models; nullopt for unknown names.
  static std::optional<TurnModel> by_name(std::string_view name);

  const std::string& name() const { return name_; }
  bool allows_slot(int slot) const { return allowed_.test(static_cast<std::size_t>(slot)); }
  bool allows(Direction in, Direction out, bool three_d) const;
  const std::bitset<kTurnSlots3d>& slots() const { return allowed_; }

  friend bool operator==(const TurnModel& a, const TurnModel& b) { return a.allowed_ == b.allowed_; }

 private:
  std::string name_ = "xy";
  std::bitset<kTurnSlots3d> allowed_;
};

}  // namespace ftnoc
