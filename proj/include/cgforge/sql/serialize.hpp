#pragma once

#include "cgforge/sql/ast.hpp"
#include "json.hpp"

// Structural JSON encoding of query trees (used by the pattern library file).
namespace cgforge::sql {

NLOHMANN_JSON_SERIALIZE_ENUM(Agg, {{Agg::kNone, "none"},
                                   {Agg::kCount, "count"},
                                   {Agg::kSum, "sum"},
                                   {Agg::kAvg, "avg"},
                                   {Agg::kMin, "min"},
                                   {Agg::kMax, "max"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ArithOp, {{ArithOp::kAdd, "+"},
                                       {ArithOp::kSub, "-"},
                                       {ArithOp::kMul, "*"},
                                       {ArithOp::kDiv, "/"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CompareOp, {{CompareOp::kEq, "="},
                                         {CompareOp::kNe, "!="},
                                         {CompareOp::kGt, ">"},
                                         {CompareOp::kLt, "<"},
                                         {CompareOp::kGe, ">="},
                                         {CompareOp::kLe, "<="},
                                         {CompareOp::kLike, "like"},
                                         {CompareOp::kNotLike, "not like"},
                                         {CompareOp::kIn, "in"},
                                         {CompareOp::kNotIn, "not in"},
                                         {CompareOp::kBetween, "between"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Connective, {{Connective::kLeaf, "leaf"},
                                          {Connective::kAnd, "and"},
                                          {Connective::kOr, "or"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SetOpKind, {{SetOpKind::kUnion, "union"},
                                         {SetOpKind::kIntersect, "intersect"},
                                         {SetOpKind::kExcept, "except"}})

void to_json(nlohmann::json& j, const ColumnRef& c);
void from_json(const nlohmann::json& j, ColumnRef& c);
void to_json(nlohmann::json& j, const AggExpr& e);
void from_json(const nlohmann::json& j, AggExpr& e);
void to_json(nlohmann::json& j, const Value& v);
void from_json(const nlohmann::json& j, Value& v);
void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);
void to_json(nlohmann::json& j, const FromClause& f);
void from_json(const nlohmann::json& j, FromClause& f);
void to_json(nlohmann::json& j, const OrderItem& o);
void from_json(const nlohmann::json& j, OrderItem& o);
void to_json(nlohmann::json& j, const SetOp& s);
void from_json(const nlohmann::json& j, SetOp& s);
void to_json(nlohmann::json& j, const Query& q);
void from_json(const nlohmann::json& j, Query& q);

}  // namespace cgforge::sql
