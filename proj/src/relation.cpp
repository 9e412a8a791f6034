#include "llql/relation.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "llql/dict.hpp"
#include "llql/error.hpp"
#include "llql/print.hpp"
#include "llql/registry.hpp"

namespace llql {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  size_t i = 0;
  bool in_row = false;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"') {
      ++i;
      for (;;) {
        if (i >= text.size()) throw DataError("unterminated quoted CSV cell");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            cell += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        cell += text[i++];
      }
      in_row = true;
      continue;
    }
    if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      in_row = true;
      ++i;
      continue;
    }
    if (c == '\n' || c == '\r') {
      if (in_row || !cell.empty()) {
        row.push_back(std::move(cell));
        cell.clear();
        rows.push_back(std::move(row));
        row.clear();
        in_row = false;
      }
      ++i;
      continue;
    }
    cell += c;
    in_row = true;
    ++i;
  }
  if (in_row || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

namespace {

struct Level {
  KeySchema schema;
  std::vector<int> cols;  // column index per schema leaf
  LType dict_type;
  std::string impl;
};

KeySchema::Scalar scalar_of(const LType& t) {
  switch (t.kind) {
    case LType::Kind::Int: return KeySchema::Scalar::Int;
    case LType::Kind::Double: return KeySchema::Scalar::Double;
    case LType::Kind::Bool: return KeySchema::Scalar::Bool;
    case LType::Kind::String: return KeySchema::Scalar::String;
    default: throw DataError("relation columns must be scalar");
  }
}

Value parse_cell(const std::string& cell, KeySchema::Scalar kind) {
  switch (kind) {
    case KeySchema::Scalar::Int: {
      int64_t v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw DataError("bad int cell '" + cell + "'");
      return Value::of(v);
    }
    case KeySchema::Scalar::Double: {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || cell.empty())
        throw DataError("bad double cell '" + cell + "'");
      return Value::of(v);
    }
    case KeySchema::Scalar::Bool:
      if (cell == "true" || cell == "1") return Value::of(true);
      if (cell == "false" || cell == "0") return Value::of(false);
      throw DataError("bad bool cell '" + cell + "'");
    case KeySchema::Scalar::String:
      return Value::of(cell);
  }
  throw DataError("bad cell");
}

void append_cell(const std::string& cell, KeySchema::Scalar kind,
                 std::string& code) {
  Value v = parse_cell(cell, kind);
  switch (kind) {
    case KeySchema::Scalar::Int: encode_int_key(v.as_int(), code); break;
    case KeySchema::Scalar::Double: encode_double_key(v.as_double(), code); break;
    case KeySchema::Scalar::Bool: code += static_cast<char>(v.as_bool()); break;
    case KeySchema::Scalar::String: {
      code += v.as_string();
      code += '\0';
      break;
    }
  }
}

std::string scalar_to_cell(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_double()) return format_real(v.as_double());
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_string()) return csv_escape(v.as_string());
  throw DataError("value cannot be written to CSV");
}

}  // namespace

Value load_relation_csv(const std::string& path, const LType& dict_type,
                        const std::string& default_impl) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open relation file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  auto rows = parse_csv(ss.str());
  if (rows.size() < 2)
    throw DataError("relation file '" + path + "' needs two header rows");
  const auto& names = rows[0];
  const auto& types = rows[1];
  if (names.size() != types.size())
    throw DataError("header rows disagree in '" + path + "'");

  std::map<std::string, int> col;
  for (size_t i = 0; i < names.size(); ++i)
    col[names[i]] = static_cast<int>(i);
  auto find_col = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end())
      throw DataError("relation '" + path + "' has no column '" + name + "'");
    return it->second;
  };

  std::vector<Level> levels;
  LType t = dict_type;
  while (t.kind == LType::Kind::Dict) {
    Level lv;
    lv.dict_type = t;
    lv.schema = KeySchema::from_type(t.key_type());
    lv.impl = t.ann.kind == DictAnnotation::Kind::Resolved ? t.ann.impl
                                                           : default_impl;
    for (const auto& name : lv.schema.column_names(t.key_label))
      lv.cols.push_back(find_col(name));
    levels.push_back(std::move(lv));
    t = t.val_type();
  }

  // Innermost value columns.
  bool mult_mode = false;
  int mult_col = -1;
  std::vector<std::pair<int, KeySchema::Scalar>> val_cols;
  std::vector<std::string> val_fields;
  if (t.kind == LType::Kind::Int && !col.count("val")) {
    mult_mode = true;
    if (col.count("__mult")) mult_col = col["__mult"];
  } else if (t.scalar()) {
    val_cols.emplace_back(find_col("val"), scalar_of(t));
  } else if (t.kind == LType::Kind::Record) {
    for (const auto& [fname, ft] : t.fields) {
      val_cols.emplace_back(find_col(fname), scalar_of(ft));
      val_fields.push_back(fname);
    }
  } else {
    throw DataError("unsupported relation value type");
  }

  auto outer = make_handle(levels[0].impl, levels[0].dict_type);
  Semiring sum;
  for (size_t r = 2; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != names.size())
      throw DataError("row " + std::to_string(r + 1) + " of '" + path +
                      "' has " + std::to_string(row.size()) + " cells, want " +
                      std::to_string(names.size()));
    DictHandle* cur = outer.get();
    for (size_t li = 0; li < levels.size(); ++li) {
      const Level& lv = levels[li];
      std::string code;
      for (size_t leaf = 0; leaf < lv.schema.leaves.size(); ++leaf)
        append_cell(row[static_cast<size_t>(lv.cols[leaf])],
                    lv.schema.leaves[leaf].kind, code);
      bool last = li + 1 == levels.size();
      if (!last) {
        Cursor c = cur->impl->find(code);
        if (!c.valid) {
          auto inner =
              make_handle(levels[li + 1].impl, levels[li + 1].dict_type);
          c = cur->impl->emplace(code, Value::of(std::move(inner)));
        }
        cur = cur->impl->value_at(c).as_dict().get();
        continue;
      }
      if (mult_mode) {
        int64_t m = 1;
        if (mult_col >= 0)
          m = parse_cell(row[static_cast<size_t>(mult_col)],
                         KeySchema::Scalar::Int)
                  .as_int();
        Cursor c = cur->impl->find(code);
        if (c.valid)
          value_add_inplace(cur->impl->value_at(c), Value::of(m), sum);
        else
          cur->impl->emplace(code, Value::of(m));
      } else {
        Value v;
        if (val_fields.empty()) {
          v = parse_cell(row[static_cast<size_t>(val_cols[0].first)],
                         val_cols[0].second);
        } else {
          std::vector<std::pair<std::string, Value>> fields;
          for (size_t i = 0; i < val_cols.size(); ++i)
            fields.emplace_back(
                val_fields[i],
                parse_cell(row[static_cast<size_t>(val_cols[i].first)],
                           val_cols[i].second));
          v = Value::record(std::move(fields));
        }
        Cursor c = cur->impl->find(code);
        if (c.valid)
          throw DataError("duplicate key in row " + std::to_string(r + 1) +
                          " of '" + path + "'");
        cur->impl->emplace(code, std::move(v));
      }
    }
  }
  return Value::of(std::move(outer));
}

Database load_database(const std::string& dir, const Program& p,
                       const std::string& default_impl) {
  Database db;
  for (const auto& in : p.inputs) {
    std::string path = dir + "/" + in.name + ".csv";
    db.inputs[in.name] = load_relation_csv(path, in.type, default_impl);
  }
  return db;
}

namespace {

const char* type_name(KeySchema::Scalar s) {
  switch (s) {
    case KeySchema::Scalar::Int: return "int";
    case KeySchema::Scalar::Double: return "double";
    case KeySchema::Scalar::Bool: return "bool";
    case KeySchema::Scalar::String: return "string";
  }
  return "?";
}

// One row per innermost entry; empty nested dictionaries contribute no rows
// (a zero value is the same as an absent key, and this format is sparse).
void flatten_rows(const DictHandle& d, std::vector<std::string>& key_cells,
                  std::string& out) {
  std::vector<Cursor> cs;
  for (Cursor c = d.impl->begin(); c.valid; d.impl->advance(c)) cs.push_back(c);
  if (!d.impl->ordered())
    std::sort(cs.begin(), cs.end(), [&](const Cursor& x, const Cursor& y) {
      return d.impl->key_at(x) < d.impl->key_at(y);
    });

  for (const Cursor& c : cs) {
    Value key = d.schema.decode(d.impl->key_at(c));
    size_t mark = key_cells.size();
    if (d.schema.bare_scalar()) {
      key_cells.push_back(scalar_to_cell(key));
    } else {
      for (const auto& leaf : d.schema.leaves) {
        const Value* v = &key;
        for (const auto& p : leaf.path) v = v->as_record()->field(p);
        key_cells.push_back(scalar_to_cell(*v));
      }
    }
    const Value& val = d.impl->value_at(c);
    if (val.is_dict()) {
      flatten_rows(*val.as_dict(), key_cells, out);
    } else {
      std::string line;
      for (const auto& cell : key_cells) {
        line += cell;
        line += ',';
      }
      if (val.is_record()) {
        bool first = true;
        for (const auto& [n, f] : val.as_record()->fields) {
          if (!first) line += ',';
          first = false;
          line += scalar_to_cell(f);
        }
      } else {
        line += scalar_to_cell(val);
      }
      out += line;
      out += '\n';
    }
    key_cells.resize(mark);
  }
}

}  // namespace

std::string dict_to_csv(const Value& dict) {
  if (!dict.is_dict()) throw DataError("result is not a dictionary");
  const DictHandle& root = *dict.as_dict();

  // Headers come from the stored types, so even empty dictionaries produce a
  // complete, loadable file.
  std::vector<std::string> header, type_row;
  auto add_key_cols = [&](const KeySchema& ks, const std::string& label) {
    auto names = ks.column_names(label);
    for (size_t i = 0; i < names.size(); ++i) {
      header.push_back(names[i]);
      type_row.push_back(type_name(ks.leaves[i].kind));
    }
  };
  add_key_cols(root.schema, root.key_label);
  LType t = root.value_type;
  while (t.kind == LType::Kind::Dict) {
    add_key_cols(KeySchema::from_type(t.key_type()), t.key_label);
    t = t.val_type();
  }
  if (t.kind == LType::Kind::Record) {
    for (const auto& [n, ft] : t.fields) {
      header.push_back(n);
      type_row.push_back(type_name(scalar_of(ft)));
    }
  } else {
    header.push_back("val");
    type_row.push_back(type_name(scalar_of(t)));
  }

  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (size_t i = 0; i < type_row.size(); ++i) {
    if (i) out += ',';
    out += type_row[i];
  }
  out += '\n';
  std::vector<std::string> key_cells;
  flatten_rows(root, key_cells, out);
  return out;
}

void save_dict_csv(const std::string& path, const Value& dict) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << dict_to_csv(dict);
}

}  // namespace llql
