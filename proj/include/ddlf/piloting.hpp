#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ddlf/types.hpp"

namespace ddlf {

struct CellIndex {
  int m = 0;
  int n = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Pilot and data cells of an M x N TF frame carrying an Mp x Np data frame.
// pilot_indices[s] is the cell of pilot s; data_indices[i] is the cell of the
// i-th data symbol, where data symbols are taken from the data frame in
// row-major order.
struct PilotPlacement {
  int M = 0;
  int N = 0;
  int Mp = 0;
  int Np = 0;
  std::vector<CellIndex> pilot_indices;
  std::vector<CellIndex> data_indices;

  int pilot_count() const { return static_cast<int>(pilot_indices.size()); }

  // Throws PilotError unless pilots and data partition the frame with
  // P = M N - Mp Np and no duplicates.
  void validate() const;

  // M x N mask: true on pilot cells.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pilot_mask() const;
};

struct PilotSequence {
  CVector symbols;
};

// Unit-magnitude QPSK pilots drawn from `seed`.
PilotSequence qpsk_pilots(int count, std::uint64_t seed);

// Squared minimal distance of the lattice {(l, lambda k + mu l)}.
long lattice_min_distance_sq(int lambda, int mu);

// argmax over mu in [0, lambda) of lattice_min_distance_sq, ties to the
// smallest mu.
int optimal_shift(int lambda);

// Accordion placement of Pp pilots per row into an Mp x Np data frame. The
// transmit frame is Mp x (Np + Pp); row m carries pilots at
// (mu_opt m + R) mod N with R = {round(i N / Pp)}.
PilotPlacement accordion_placement(int Mp, int Np, int Pp);

// Every cell is a pilot (no data frame).
PilotPlacement full_pilot_placement(int M, int N);

// All pilots of a row in the leading columns. Reference for spacing checks.
PilotPlacement clustered_placement(int Mp, int Np, int Pp);

// Smallest Euclidean distance between two distinct pilot cells (inf when
// there are fewer than two pilots).
double min_pilot_distance(const PilotPlacement& pl);

Frame multiplex(const Frame& data, const PilotSequence& pilots, const PilotPlacement& pl);
Frame demultiplex(const Frame& frame, const PilotPlacement& pl);
CVector extract_pilots(const Frame& y, const PilotPlacement& pl);

// CSV with header m,n,kind,order (kind is pilot or data, order is the pilot
// or data-symbol number).
void write_placement_csv(std::ostream& out, const PilotPlacement& pl);

}  // namespace ddlf
