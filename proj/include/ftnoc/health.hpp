// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ftnoc/graphs.hpp"
#include "ftnoc/turn_model.hpp"

namespace ftnoc {

enum class Health : std::uint8_t { Healthy = 0, Broken = 1 };

struct PeFault {
  TileId tile = 0;
  friend auto operator<=>(const PeFault&, const PeFault&) = default;
};
struct TurnFault {
  TileId tile = 0;
  int slot = 0;
  friend auto operator<=>(const TurnFault&, const TurnFault&) = default;
};
struct LinkFault {
  LinkId link = 0;
  friend auto operator<=>(const LinkFault&, const LinkFault&) = default;
};

/// One SHM element to be marked Broken.
using Fault = std::variant<PeFault, TurnFault, LinkFault>;

std::string describe(const Fault& f);

class SystemHealthMap;

/// Opaque full copy of an SHM.
class ShmSnapshot {
 public:
  const MeshDims& dims() const;

 private:
  friend ShmSnapshot snapshot(const SystemHealthMap&);
  friend void restore(SystemHealthMap&, const ShmSnapshot&);
  explicit ShmSnapshot(std::vector<std::uint8_t> bytes, MeshDims dims, std::size_t links)
      : bytes_(std::move(bytes)), dims_(dims), links_(links) {}

  std::vector<std::uint8_t> bytes_;
  MeshDims dims_;
  std::size_t links_ = 0;
};

/// Binary health of every PE, turn and directed link plus one aging byte per PE.
///
/// Readers get a const reference; the only mutators are the free functions
/// apply_fault, set_aging and restore, which the SHMU owns.
class SystemHealthMap {
 public:
  explicit SystemHealthMap(const ArchitectureGraph& ag);

  const MeshDims& dims() const { return dims_; }
  std::size_t tile_count() const { return pe_.size(); }
  std::size_t link_count() const { return link_.size(); }
  int turn_slot_count() const { return slots_; }

  Health pe(TileId t) const { return pe_.at(idx(t)); }
  Health turn(TileId t, int slot) const { return turns_.at(idx(t) * static_cast<std::size_t>(slots_) + static_cast<std::size_t>(slot)); }
  Health link(LinkId l) const { return link_.at(static_cast<std::size_t>(l)); }
  std::uint8_t aging(TileId t) const { return aging_.at(idx(t)); }

  /// Healthy and not fully aged; the only PEs a mapping may use.
  bool pe_usable(TileId t) const { return pe(t) == Health::Healthy && aging(t) < 100; }
  bool is_broken(const Fault& f) const;
  std::size_t broken_count() const;

  /// Canonical text form: tiles, then turn slots, then links, then aging bytes.
  std::string serialize() const;

  /// True when both maps describe the same mesh.
  bool same_shape(const SystemHealthMap& other) const {
    return dims_ == other.dims_ && link_.size() == other.link_.size();
  }

  friend bool operator==(const SystemHealthMap&, const SystemHealthMap&) = default;

 private:
  friend void apply_fault(SystemHealthMap&, const Fault&);
  friend void set_aging(SystemHealthMap&, TileId, int);
  friend ShmSnapshot snapshot(const SystemHealthMap&);
  friend void restore(SystemHealthMap&, const ShmSnapshot&);

  static std::size_t idx(TileId t) { return static_cast<std::size_t>(t); }

  MeshDims dims_;
  int slots_ = kTurnSlots2d;
  std::vector<Health> pe_;
  std::vector<Health> turns_;
  std::vector<Health> link_;
  std::vector<std::uint8_t> aging_;
};

/// Marks the target Broken; idempotent. Throws UnknownTarget.
void apply_fault(SystemHealthMap& shm, const Fault& fault);

/// Stores a frequency decrement percentage. Throws RangeError outside 0..100, UnknownTarget.
void set_aging(SystemHealthMap& shm, TileId tile, int decrement_percent);

ShmSnapshot snapshot(const SystemHealthMap& shm);
/// Throws DimensionMismatch when the snapshot came from another mesh.
void restore(SystemHealthMap& shm, const ShmSnapshot& snap);

/// Execution time on a PE slowed by `aging_percent`: ceil(wcet / (1 - aging/100)).
/// Returns nullopt at 100% (PE unusable).
std::optional<std::int64_t> effective_wcet(std::int64_t wcet, int aging_percent);

/// LBDR connectivity and routing bits of one 2D router.
struct LbdrConfig {
  // Connectivity: C_n, C_e, C_w, C_s.
  bool cn = false, ce = false, cw = false, cs = false;
  // Routing: R_ab = 1 lets a packet arriving on side a leave through side b.
  bool rne = false, rnw = false, ren = false, res = false;
  bool rwn = false, rws = false, rse = false, rsw = false;

  friend bool operator==(const LbdrConfig&, const LbdrConfig&) = default;

  /// Bits in the order C_n C_e C_w C_s | R_ne R_nw R_en R_es R_wn R_ws R_se R_sw.
  std::string to_string() const;
  bool connectivity(Direction d) const;
  bool routing(Direction in, Direction out) const;
};

/// Throws UnknownTile; throws DimensionMismatch for 3D meshes (LBDR is 2D only).
LbdrConfig derive_lbdr_config(const SystemHealthMap& shm, const ArchitectureGraph& ag,
                              const TurnModel& model, TileId tile);

}  // namespace ftnoc
