#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace specguard {

/// Oracle categories observed in mined response-body constraints.
enum class Category {
  InputOutput,
  IsUrl,
  IsDateTime,
  ValueInSet,
  Composite,
  IsDate,
  StringSpecificLength,
  ValueInRange,
  IsBoolean,
  IsNumber,
  IsUnixTime,
  TemplateLiterals,
  ArrayOfString,
  ArraySpecificSizes,
  NaryAtomic,
  IsTime,
  Uncategorized,
};

inline constexpr std::array<Category, 16> kOracleCategories = {
    Category::InputOutput,  Category::IsUrl,          Category::IsDateTime,
    Category::ValueInSet,   Category::Composite,      Category::IsDate,
    Category::StringSpecificLength, Category::ValueInRange, Category::IsBoolean,
    Category::IsNumber,     Category::IsUnixTime,     Category::TemplateLiterals,
    Category::ArrayOfString, Category::ArraySpecificSizes, Category::NaryAtomic,
    Category::IsTime,
};

std::string_view to_string(Category c);
/// Accepts the canonical names plus a few spelling variants
/// (`Template-Literals`, `IO`, `io`).
std::optional<Category> category_from_string(std::string_view s);

}  // namespace specguard
