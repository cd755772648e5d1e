// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ftnoc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FTNOC_DEFINE_ERROR(Name) \
  class Name : public Error {    \
   public:                       \
    using Error::Error;          \
  }

// graphs
FTNOC_DEFINE_ERROR(CycleError);
FTNOC_DEFINE_ERROR(DanglingEdgeError);
FTNOC_DEFINE_ERROR(InvalidGraphError);
FTNOC_DEFINE_ERROR(ZeroDimensionError);
FTNOC_DEFINE_ERROR(InfeasibleK);

// routing / health / reachability
FTNOC_DEFINE_ERROR(DimensionMismatch);
FTNOC_DEFINE_ERROR(UnknownTarget);
FTNOC_DEFINE_ERROR(UnknownTile);
FTNOC_DEFINE_ERROR(UnknownPort);
FTNOC_DEFINE_ERROR(RangeError);
FTNOC_DEFINE_ERROR(ConfigError);

// mapsched / shmu
FTNOC_DEFINE_ERROR(NoHealthyPE);
FTNOC_DEFINE_ERROR(InfeasibleInstance);
FTNOC_DEFINE_ERROR(EmptyHistory);
FTNOC_DEFINE_ERROR(LengthMismatch);
FTNOC_DEFINE_ERROR(InvalidMapping);

// scenario files
FTNOC_DEFINE_ERROR(ParseError);
FTNOC_DEFINE_ERROR(SemanticError);

#undef FTNOC_DEFINE_ERROR

/// A communicating task pair was placed on tiles with no route between them.
class UnroutableFlow : public Error {
 public:
  UnroutableFlow(int src_tile, int dst_tile)
      : Error("no route from tile " + std::to_string(src_tile) + " to tile " +
              std::to_string(dst_tile)),
        src_tile(src_tile),
        dst_tile(dst_tile) {}

  int src_tile;
  int dst_tile;
};

}  // namespace ftnoc
