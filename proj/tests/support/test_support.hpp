#pragma once

#include <filesystem>
#include <string>

#include "cgforge/io/dataset.hpp"
#include "cgforge/sql/parser.hpp"

namespace cgforge::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CGFORGE_FIXTURES) / name;
}

inline const io::Catalog& catalog() {
  static const io::Catalog kCatalog = io::load_schema_catalog(fixture("tables.json"));
  return kCatalog;
}

inline const Schema& schema(const std::string& db_id) { return catalog().at(db_id); }

inline QueryAst parse(const std::string& sql, const std::string& db_id = "flight_2") {
  return sql::parse_sql(sql, schema(db_id));
}

}  // namespace cgforge::testing
