#pragma once

#include <cstdint>
#include <string>

#include "deniable/constraints.hpp"
#include "deniable/model.hpp"

namespace deniable {

struct GenerateOptions {
  std::size_t rows = 100;
  std::uint64_t seed = 42;
  std::size_t attempts_per_tuple = 200;
  std::size_t owners = 10;  // distinct owner ids when the schema has an owner column
};

// Builds tuples one attribute at a time, in schema order, keeping the first
// candidate value that violates no constraint against earlier tuples. Function
// constraint outputs are computed from their inputs, which must precede them.
// Throws Error(GenerationTimeout) when a tuple cannot be completed.
RelationInstance generate(const Schema& schema, const DependencySet& deps,
                          const GenerateOptions& options);

// A tax-records style schema and five functional-dependency constraints plus
// tax = fn(salary, rate).
Schema tax_like_schema();
std::string tax_like_constraints();

}  // namespace deniable
