// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/health.hpp"

#include <algorithm>
#include <sstream>

#include "ftnoc/error.hpp"

namespace ftnoc {

namespace {

char symbol(Health h) { return h == Health::Healthy ? 'H' : 'B'; }

}  // namespace

std::string describe(const Fault& f) {
  struct {
    std::string operator()(const PeFault& p) const { return "pe(" + std::to_string(p.tile) + ")"; }
    std::string operator()(const TurnFault& t) const {
      return "turn(" + std::to_string(t.tile) + "," + std::to_string(t.slot) + ")";
    }
    std::string operator()(const LinkFault& l) const { return "link(" + std::to_string(l.link) + ")"; }
  } v;
  return std::visit(v, f);
}

SystemHealthMap::SystemHealthMap(const ArchitectureGraph& ag)
    : dims_(ag.dims()),
      slots_(ag.dims().three_d ? kTurnSlots3d : kTurnSlots2d),
      pe_(ag.tile_count(), Health::Healthy),
      turns_(ag.tile_count() * static_cast<std::size_t>(slots_), Health::Healthy),
      link_(ag.link_count(), Health::Healthy),
      aging_(ag.tile_count(), 0) {
  for (const Tile& t : ag.tiles())
    if (!t.pe_present) pe_[idx(t.id)] = Health::Broken;
}

bool SystemHealthMap::is_broken(const Fault& f) const {
  struct {
    const SystemHealthMap& s;
    bool operator()(const PeFault& p) const { return s.pe(p.tile) == Health::Broken; }
    bool operator()(const TurnFault& t) const { return s.turn(t.tile, t.slot) == Health::Broken; }
    bool operator()(const LinkFault& l) const { return s.link(l.link) == Health::Broken; }
  } v{*this};
  return std::visit(v, f);
}

std::size_t SystemHealthMap::broken_count() const {
  auto broken = [](Health h) { return h == Health::Broken; };
  return static_cast<std::size_t>(std::count_if(pe_.begin(), pe_.end(), broken) +
                                  std::count_if(turns_.begin(), turns_.end(), broken) +
                                  std::count_if(link_.begin(), link_.end(), broken));
}

std::string SystemHealthMap::serialize() const {
  std::ostringstream os;
  os << "shm " << to_string(dims_) << " links=" << link_.size() << " slots=" << slots_ << '\n';
  for (std::size_t t = 0; t < pe_.size(); ++t) os << "pe " << t << ' ' << symbol(pe_[t]) << '\n';
  for (std::size_t t = 0; t < pe_.size(); ++t) {
    os << "turn " << t << ' ';
    for (int s = 0; s < slots_; ++s) os << symbol(turns_[t * static_cast<std::size_t>(slots_) + static_cast<std::size_t>(s)]);
    os << '\n';
  }
  for (std::size_t l = 0; l < link_.size(); ++l) os << "link " << l << ' ' << symbol(link_[l]) << '\n';
  for (std::size_t t = 0; t < aging_.size(); ++t) os << "aging " << t << ' ' << static_cast<int>(aging_[t]) << '\n';
  return os.str();
}

void apply_fault(SystemHealthMap& shm, const Fault& fault) {
  const auto tiles = shm.pe_.size();
  struct {
    SystemHealthMap& s;
    std::size_t tiles;
    void operator()(const PeFault& p) const {
      if (p.tile < 0 || static_cast<std::size_t>(p.tile) >= tiles)
        throw UnknownTarget("no PE at tile " + std::to_string(p.tile));
      s.pe_[static_cast<std::size_t>(p.tile)] = Health::Broken;
    }
    void operator()(const TurnFault& t) const {
      if (t.tile < 0 || static_cast<std::size_t>(t.tile) >= tiles || t.slot < 0 || t.slot >= s.slots_)
        throw UnknownTarget("no turn slot " + std::to_string(t.slot) + " at tile " + std::to_string(t.tile));
      s.turns_[static_cast<std::size_t>(t.tile) * static_cast<std::size_t>(s.slots_) + static_cast<std::size_t>(t.slot)] =
          Health::Broken;
    }
    void operator()(const LinkFault& l) const {
      if (l.link < 0 || static_cast<std::size_t>(l.link) >= s.link_.size())
        throw UnknownTarget("no link " + std::to_string(l.link));
      s.link_[static_cast<std::size_t>(l.link)] = Health::Broken;
    }
  } v{shm, tiles};
  std::visit(v, fault);
}

void set_aging(SystemHealthMap& shm, TileId tile, int decrement_percent) {
  if (tile < 0 || static_cast<std::size_t>(tile) >= shm.aging_.size())
    throw UnknownTarget("no PE at tile " + std::to_string(tile));
  if (decrement_percent < 0 || decrement_percent > 100)
    throw RangeError("aging decrement must be within 0..100, got " + std::to_string(decrement_percent));
  shm.aging_[static_cast<std::size_t>(tile)] = static_cast<std::uint8_t>(decrement_percent);
}

const MeshDims& ShmSnapshot::dims() const { return dims_; }

ShmSnapshot snapshot(const SystemHealthMap& shm) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(shm.pe_.size() + shm.turns_.size() + shm.link_.size() + shm.aging_.size());
  for (Health h : shm.pe_) bytes.push_back(static_cast<std::uint8_t>(h));
  for (Health h : shm.turns_) bytes.push_back(static_cast<std::uint8_t>(h));
  for (Health h : shm.link_) bytes.push_back(static_cast<std::uint8_t>(h));
  bytes.insert(bytes.end(), shm.aging_.begin(), shm.aging_.end());
  return ShmSnapshot(std::move(bytes), shm.dims_, shm.link_.size());
}

void restore(SystemHealthMap& shm, const ShmSnapshot& snap) {
  if (!(snap.dims_ == shm.dims_) || snap.links_ != shm.link_.size())
    throw DimensionMismatch("snapshot was taken from a different mesh");
  auto it = snap.bytes_.begin();
  for (Health& h : shm.pe_) h = static_cast<Health>(*it++);
  for (Health& h : shm.turns_) h = static_cast<Health>(*it++);
  for (Health& h : shm.link_) h = static_cast<Health>(*it++);
  for (auto& a : shm.aging_) a = *it++;
}

std::optional<std::int64_t> effective_wcet(std::int64_t wcet, int aging_percent) {
  if (aging_percent >= 100) return std::nullopt;
  if (aging_percent <= 0) return wcet;
  const std::int64_t speed = 100 - aging_percent;
  return (wcet * 100 + speed - 1) / speed;
}

// ---------------------------------------------------------------------------
// LBDR

std::string LbdrConfig::to_string() const {
  std::string s;
  for (bool b : {cn, ce, cw, cs}) s += b ? '1' : '0';
  s += '|';
  for (bool b : {rne, rnw, ren, res, rwn, rws, rse, rsw}) s += b ? '1' : '0';
  return s;
}

bool LbdrConfig::connectivity(Direction d) const {
  switch (d) {
    case Direction::N: return cn;
    case Direction::E: return ce;
    case Direction::W: return cw;
    case Direction::S: return cs;
    default: return false;
  }
}

bool LbdrConfig::routing(Direction in, Direction out) const {
  using enum Direction;
  if (in == N && out == E) return rne;
  if (in == N && out == W) return rnw;
  if (in == E && out == N) return ren;
  if (in == E && out == S) return res;
  if (in == W && out == N) return rwn;
  if (in == W && out == S) return rws;
  if (in == S && out == E) return rse;
  if (in == S && out == W) return rsw;
  return false;
}

LbdrConfig derive_lbdr_config(const SystemHealthMap& shm, const ArchitectureGraph& ag,
                              const TurnModel& model, TileId tile) {
  if (!ag.has_tile(tile)) throw UnknownTile("tile " + std::to_string(tile) + " does not exist");
  if (ag.dims().three_d) throw DimensionMismatch("LBDR bits are defined for 2D meshes only");
  if (!(shm.dims() == ag.dims())) throw DimensionMismatch("SHM does not match the architecture graph");

  auto conn = [&](Direction d) {
    const auto l = ag.out_link(tile, d);
    return l && shm.link(*l) == Health::Healthy;
  };
  auto turn = [&](Direction in, Direction out) {
    const int slot = *turn_slot(in, out, false);
    return model.allows_slot(slot) && shm.turn(tile, slot) == Health::Healthy;
  };
  using enum Direction;
  LbdrConfig c;
  c.cn = conn(N);
  c.ce = conn(E);
  c.cw = conn(W);
  c.cs = conn(S);
  c.rne = turn(N, E);
  c.rnw = turn(N, W);
  c.ren = turn(E, N);
  c.res = turn(E, S);
  c.rwn = turn(W, N);
  c.rws = turn(W, S);
  c.rse = turn(S, E);
  c.rsw = turn(S, W);
  return c;
}

}  // namespace ftnoc
