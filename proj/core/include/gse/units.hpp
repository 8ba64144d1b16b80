#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gse {

/// target = source * factor + offset
struct UnitConversion {
    std::string source_unit;
    std::string target_unit;
    double factor = 1.0;
    double offset = 0.0;

    double apply(double x) const noexcept { return x * factor + offset; }

    friend bool operator==(const UnitConversion&, const UnitConversion&) = default;
};

/// Lowercases and resolves common aliases ("sec" -> "s", "°c" -> "celsius").
std::string normalize_unit(std::string_view unit);

/// Built-in table lookup. Identical units give the identity conversion;
/// unrelated units give nullopt.
std::optional<UnitConversion> infer_unit_conversion(std::string_view source_unit, std::string_view target_unit);

}  // namespace gse
