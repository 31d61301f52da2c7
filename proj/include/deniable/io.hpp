#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "deniable/model.hpp"

namespace deniable {

// Token written for hidden cells.
inline constexpr std::string_view kNullToken = "\\N";

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// {relation, attributes:[{name, kind, values | range:[min,max], bins?}],
//  owner_column?, fc_function?: "product" | "sum"}
Schema parse_schema(std::string_view json_text);
std::string format_schema(const Schema& schema);

// RFC-4180 records. Quoted fields may contain separators, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string format_csv_field(std::string_view field);

// Header must list the schema attributes in order; the owner column, when the
// schema declares one, may appear anywhere in the header.
RelationInstance load_relation(std::string_view csv_text, const Schema& schema);
std::string format_relation(const RelationInstance& instance);

// Hidden cells become \N.
std::string format_view(const QuerierView& view);

// Reads a view previously written by format_view. Every visible field must
// agree with the instance; throws Error(InvalidInstance) otherwise.
QuerierView load_view(std::string_view csv_text, std::shared_ptr<const RelationInstance> instance);

// Either a list of realistic policies or of direct cell lists; a single object
// is accepted as a one-element list.
std::vector<Policy> parse_policies(std::string_view json_text);

}  // namespace deniable
