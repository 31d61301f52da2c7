#include "deniable/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deniable/error.hpp"

namespace deniable {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

namespace {

json parse_json(std::string_view text, Errc code) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(code, std::string("malformed JSON: ") + e.what());
  }
}

Value json_to_value(const json& j, Errc code) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(code, "expected a number or string, got " + j.dump());
}

json value_to_json(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double out = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
  return out;
}

std::optional<Value> parse_field(const AttributeDef& attr, std::string_view text) {
  const auto number = parse_number(text);
  if (attr.kind == AttributeKind::Continuous) {
    if (!number || !attr.contains(*number)) return std::nullopt;
    return Value(*number);
  }
  for (const Value& v : attr.values) {
    if (const auto* s = std::get_if<std::string>(&v)) {
      if (*s == text) return v;
    } else if (number && values_equal(v, Value(*number))) {
      return v;
    }
  }
  return std::nullopt;
}

}  // namespace

Schema parse_schema(std::string_view json_text) {
  const json j = parse_json(json_text, Errc::InvalidSchema);
  try {
    std::vector<AttributeDef> attrs;
    for (const json& a : j.at("attributes")) {
      AttributeDef def;
      def.name = a.at("name").get<std::string>();
      const std::string kind = a.value("kind", std::string("discrete"));
      if (kind == "discrete") {
        def.kind = AttributeKind::Discrete;
        for (const json& v : a.at("values")) def.values.push_back(json_to_value(v, Errc::InvalidSchema));
      } else if (kind == "continuous") {
        def.kind = AttributeKind::Continuous;
        const json& range = a.at("range");
        if (!range.is_array() || range.size() != 2) {
          throw Error(Errc::InvalidSchema, "range of '" + def.name + "' must be [min, max]");
        }
        def.min = range[0].get<double>();
        def.max = range[1].get<double>();
        def.bins = a.value("bins", std::size_t{16});
      } else {
        throw Error(Errc::InvalidSchema, "unknown attribute kind '" + kind + "'");
      }
      attrs.push_back(std::move(def));
    }
    std::optional<std::string> owner;
    if (j.contains("owner_column") && !j["owner_column"].is_null()) {
      owner = j["owner_column"].get<std::string>();
    }
    FcArithmetic fc = FcArithmetic::Product;
    if (j.contains("fc_function")) {
      const auto f = j["fc_function"].get<std::string>();
      if (f == "sum") {
        fc = FcArithmetic::Sum;
      } else if (f != "product") {
        throw Error(Errc::InvalidSchema, "fc_function must be 'product' or 'sum'");
      }
    }
    return Schema(j.at("relation").get<std::string>(), std::move(attrs), std::move(owner), fc);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidSchema, std::string("schema: ") + e.what());
  }
}

std::string format_schema(const Schema& schema) {
  json j;
  j["relation"] = schema.relation();
  j["attributes"] = json::array();
  for (const auto& a : schema.attributes()) {
    json o{{"name", a.name}};
    if (a.is_discrete()) {
      o["kind"] = "discrete";
      o["values"] = json::array();
      for (const auto& v : a.values) o["values"].push_back(value_to_json(v));
    } else {
      o["kind"] = "continuous";
      o["range"] = {a.min, a.max};
      o["bins"] = a.bins;
    }
    j["attributes"].push_back(std::move(o));
  }
  if (schema.owner_column()) j["owner_column"] = *schema.owner_column();
  if (schema.fc_arithmetic() == FcArithmetic::Sum) j["fc_function"] = "sum";
  return j.dump(2) + "\n";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  const auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += ch;
      }
      ++i;
      continue;
    }
    if (ch == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += ch;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw Error(Errc::SchemaMismatch, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string format_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

namespace {

struct HeaderLayout {
  std::vector<std::size_t> attribute_column;  // attribute index -> CSV column
  std::optional<std::size_t> owner_column;
  std::size_t width = 0;
};

HeaderLayout match_header(const std::vector<std::string>& header, const Schema& schema) {
  HeaderLayout layout;
  layout.width = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (schema.owner_column() && header[c] == *schema.owner_column()) {
      layout.owner_column = c;
      continue;
    }
    layout.attribute_column.push_back(c);
  }
  bool ok = layout.attribute_column.size() == schema.size();
  for (std::size_t a = 0; ok && a < schema.size(); ++a) {
    ok = header[layout.attribute_column[a]] == schema.attribute(a).name;
  }
  if (!ok) {
    std::string expected;
    for (const auto& a : schema.attributes()) expected += (expected.empty() ? "" : ",") + a.name;
    throw Error(Errc::SchemaMismatch, "CSV header does not match schema attributes " + expected);
  }
  return layout;
}

}  // namespace

RelationInstance load_relation(std::string_view csv_text, const Schema& schema) {
  auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(Errc::SchemaMismatch, "CSV has no header row");
  const HeaderLayout layout = match_header(records.front(), schema);

  std::vector<std::vector<Value>> rows;
  std::vector<std::string> owners;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (rec.size() != layout.width) {
      throw Error(Errc::SchemaMismatch, "row " + std::to_string(r - 1) + " has " +
                                            std::to_string(rec.size()) + " fields, expected " +
                                            std::to_string(layout.width));
    }
    std::vector<Value> row;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const std::string& text = rec[layout.attribute_column[a]];
      auto v = parse_field(schema.attribute(a), text);
      if (!v) {
        throw Error(Errc::DomainViolation, "row " + std::to_string(rows.size()) + ", column '" +
                                               schema.attribute(a).name + "': value \"" + text +
                                               "\" outside domain");
      }
      row.push_back(std::move(*v));
    }
    if (layout.owner_column) owners.push_back(rec[*layout.owner_column]);
    rows.push_back(std::move(row));
  }
  if (schema.owner_column() && !layout.owner_column && !rows.empty()) {
    throw Error(Errc::SchemaMismatch, "owner column '" + *schema.owner_column() + "' missing");
  }
  return RelationInstance(schema, std::move(rows), std::move(owners));
}

namespace {

std::string format_rows(const RelationInstance& inst, const QuerierView* view) {
  const Schema& schema = inst.schema();
  std::string out;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (a) out += ',';
    out += format_csv_field(schema.attribute(a).name);
  }
  if (inst.has_owners()) out += "," + format_csv_field(*schema.owner_column());
  out += '\n';
  for (std::uint32_t t = 0; t < inst.tuples(); ++t) {
    for (std::uint32_t a = 0; a < inst.arity(); ++a) {
      if (a) out += ',';
      if (view && view->is_hidden({t, a})) {
        out += kNullToken;
      } else {
        out += format_csv_field(to_text(inst.at(t, a)));
      }
    }
    if (inst.has_owners()) out += "," + format_csv_field(inst.owner(t));
    out += '\n';
  }
  return out;
}

}  // namespace

std::string format_relation(const RelationInstance& instance) {
  return format_rows(instance, nullptr);
}

std::string format_view(const QuerierView& view) { return format_rows(view.instance(), &view); }

QuerierView load_view(std::string_view csv_text, std::shared_ptr<const RelationInstance> instance) {
  const Schema& schema = instance->schema();
  auto records = parse_csv(csv_text);
  if (records.empty()) throw Error(Errc::SchemaMismatch, "view CSV has no header row");
  const HeaderLayout layout = match_header(records.front(), schema);

  std::vector<CellRef> hidden;
  std::uint32_t t = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (t >= instance->tuples() || rec.size() != layout.width) {
      throw Error(Errc::InvalidInstance, "view row " + std::to_string(t) +
                                             " does not line up with the data file");
    }
    for (std::uint32_t a = 0; a < schema.size(); ++a) {
      const std::string& text = rec[layout.attribute_column[a]];
      if (text == kNullToken) {
        hidden.push_back({t, a});
        continue;
      }
      auto v = parse_field(schema.attribute(a), text);
      if (!v || !values_equal(*v, instance->at(t, a))) {
        throw Error(Errc::InvalidInstance, "view cell " + to_string(CellRef{t, a}) +
                                               " disagrees with the data file");
      }
    }
    ++t;
  }
  if (t != instance->tuples()) {
    throw Error(Errc::InvalidInstance, "view has " + std::to_string(t) + " rows, data has " +
                                           std::to_string(instance->tuples()));
  }
  return QuerierView(std::move(instance)).with_hidden(hidden);
}

namespace {

CompareOp parse_op(const std::string& s) {
  if (s == "=" || s == "==") return CompareOp::Eq;
  if (s == "!=" || s == "<>") return CompareOp::Ne;
  if (s == "<") return CompareOp::Lt;
  if (s == "<=") return CompareOp::Le;
  if (s == ">") return CompareOp::Gt;
  if (s == ">=") return CompareOp::Ge;
  throw Error(Errc::InvalidPolicy, "unknown operator '" + s + "'");
}

Policy parse_policy(const json& j) {
  Policy p;
  p.querier = j.at("querier").get<std::string>();
  const std::string action = j.value("action", std::string("deny"));
  if (action == "deny") {
    p.action = PolicyAction::Deny;
  } else if (action == "allow") {
    p.action = PolicyAction::Allow;
  } else {
    throw Error(Errc::InvalidPolicy, "action must be 'deny' or 'allow'");
  }
  if (j.contains("cells")) {
    std::vector<std::pair<std::size_t, std::string>> cells;
    for (const json& c : j["cells"]) {
      if (!c.is_array() || c.size() != 2) {
        throw Error(Errc::InvalidPolicy, "cell entries must be [tuple_index, attribute]");
      }
      cells.emplace_back(c[0].get<std::size_t>(), c[1].get<std::string>());
    }
    p.cells = std::move(cells);
    return p;
  }
  p.relation = j.value("relation", std::string());
  for (const json& s : j.value("selection", json::array())) {
    p.selection.push_back({s.at("attr").get<std::string>(), parse_op(s.at("op").get<std::string>()),
                           json_to_value(s.at("value"), Errc::InvalidPolicy)});
  }
  for (const json& a : j.at("projection")) p.projection.push_back(a.get<std::string>());
  return p;
}

}  // namespace

std::vector<Policy> parse_policies(std::string_view json_text) {
  const json j = parse_json(json_text, Errc::InvalidPolicy);
  std::vector<Policy> out;
  try {
    if (j.is_array()) {
      for (const json& p : j) out.push_back(parse_policy(p));
    } else {
      out.push_back(parse_policy(j));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidPolicy, std::string("policy: ") + e.what());
  }
  return out;
}

}  // namespace deniable
