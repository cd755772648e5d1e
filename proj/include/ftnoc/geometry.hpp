// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace ftnoc {

using TileId = int;
using LinkId = int;

/// Port directions. x grows east, y grows north, z grows up.
enum class Direction : std::uint8_t { N = 0, E = 1, W = 2, S = 3, U = 4, D = 5, L = 6 };

inline constexpr std::array<Direction, 5> kPorts2d{Direction::N, Direction::E, Direction::W,
                                                   Direction::S, Direction::L};
inline constexpr std::array<Direction, 7> kPorts3d{Direction::N, Direction::E, Direction::W,
                                                   Direction::S, Direction::U, Direction::D,
                                                   Direction::L};

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::N: return Direction::S;
    case Direction::S: return Direction::N;
    case Direction::E: return Direction::W;
    case Direction::W: return Direction::E;
    case Direction::U: return Direction::D;
    case Direction::D: return Direction::U;
    case Direction::L: return Direction::L;
  }
  return Direction::L;
}

constexpr bool is_planar(Direction d) {
  return d == Direction::N || d == Direction::E || d == Direction::W || d == Direction::S;
}

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;

  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

/// Offset of one hop in direction `d`.
constexpr Coord step(Coord c, Direction d) {
  switch (d) {
    case Direction::N: ++c.y; break;
    case Direction::S: --c.y; break;
    case Direction::E: ++c.x; break;
    case Direction::W: --c.x; break;
    case Direction::U: ++c.z; break;
    case Direction::D: --c.z; break;
    case Direction::L: break;
  }
  return c;
}

/// Mesh extent. `three_d` selects the 14-node router layout even when depth == 1.
struct MeshDims {
  int width = 1;
  int height = 1;
  int depth = 1;
  bool three_d = false;

  int tile_count() const { return width * height * depth; }

  bool contains(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < width && c.y < height && c.z < depth;
  }

  /// Row-major linearization from (0,0,0).
  TileId id(Coord c) const { return c.x + c.y * width + c.z * width * height; }

  Coord coord(TileId t) const {
    return Coord{t % width, (t / width) % height, t / (width * height)};
  }

  std::span<const Direction> ports() const {
    if (three_d) return kPorts3d;
    return kPorts2d;
  }

  /// Index of `d` inside ports(); -1 if the direction does not exist here.
  int port_index(Direction d) const {
    const auto p = ports();
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] == d) return static_cast<int>(i);
    return -1;
  }

  friend bool operator==(const MeshDims&, const MeshDims&) = default;
};

std::string to_string(Coord c, bool three_d);
std::string to_string(const MeshDims& dims);

}  // namespace ftnoc
