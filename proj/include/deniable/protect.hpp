#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deniable/detect.hpp"

namespace deniable {

struct HideSelection {
  std::set<CellRef> cells;
  std::vector<CellRef> covered_by;  // one entry per input cueset
};

// Visits cuesets in a seeded random order; a cueset not yet covered gets one
// uniformly chosen member.
HideSelection protect_random(std::span<const Cueset> cuesets, std::uint64_t seed);

// Greedy cover: repeatedly hides the cell appearing in the most uncovered
// cuesets (duplicates counted), smallest CellRef on ties.
HideSelection protect_mvc(std::span<const Cueset> cuesets);

// Adds, for every tuple holding a selected cell, that tuple's cells under the
// given attributes. Throws Error(UnknownAttribute).
HideSelection protect_cloak(HideSelection selection, std::span<const std::string> sensitive_attrs,
                            const Schema& schema);

}  // namespace deniable
