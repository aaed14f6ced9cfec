#include "specguard/category.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace specguard {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::InputOutput: return "I/O";
    case Category::IsUrl: return "isUrl";
    case Category::IsDateTime: return "isDateTime";
    case Category::ValueInSet: return "Value-In-Set";
    case Category::Composite: return "Composite";
    case Category::IsDate: return "isDate";
    case Category::StringSpecificLength: return "String_Specific_Length";
    case Category::ValueInRange: return "Value-In-Range";
    case Category::IsBoolean: return "isBoolean";
    case Category::IsNumber: return "isNumber";
    case Category::IsUnixTime: return "isUnixTime";
    case Category::TemplateLiterals: return "Template Literals";
    case Category::ArrayOfString: return "ArrayTypeOracle_isString";
    case Category::ArraySpecificSizes: return "Array_Specific_Sizes";
    case Category::NaryAtomic: return "N-ary atomic";
    case Category::IsTime: return "isTime";
    case Category::Uncategorized: return "Uncategorized";
  }
  return "Uncategorized";
}

namespace {

std::string fold(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-' || c == '/') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::optional<Category> category_from_string(std::string_view s) {
  const auto key = fold(s);
  if (key == "io" || key == "inputoutput") return Category::InputOutput;
  for (Category c : kOracleCategories) {
    if (fold(to_string(c)) == key) return c;
  }
  if (key == "uncategorized") return Category::Uncategorized;
  return std::nullopt;
}

}  // namespace specguard
