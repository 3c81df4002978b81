#pragma once

#include <string>

#include "cgforge/sql/ast.hpp"
#include "cgforge/sql/schema.hpp"

namespace cgforge::sql {

// Anonymized query structure. Tables become `tabN`, columns `colN:<type>`,
// literals `valN`, numbered by first occurrence in printing order. Join
// conditions that follow a foreign key collapse to `tabA.fk = tabB.fk`
// (referencing side first).
struct QueryTemplate {
  Query skeleton;
  std::string text;
  std::string hash;  // stable hash of `text`

  friend bool operator==(const QueryTemplate& a, const QueryTemplate& b) {
    return a.text == b.text;
  }
};

QueryTemplate template_of(const Query& q, const Schema& schema);

}  // namespace cgforge::sql
