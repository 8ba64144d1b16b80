#include "gse/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gse {

namespace {

struct Entry {
    std::string_view from;
    std::string_view to;
    double factor;
    double offset;
};

// Both directions are listed explicitly so each inverse is the exact literal.
constexpr std::array kTable = {
    Entry{"ms", "s", 0.001, 0.0},
    Entry{"s", "ms", 1000.0, 0.0},
    Entry{"s", "min", 1.0 / 60.0, 0.0},
    Entry{"min", "s", 60.0, 0.0},
    Entry{"m", "cm", 100.0, 0.0},
    Entry{"cm", "m", 0.01, 0.0},
    Entry{"celsius", "fahrenheit", 1.8, 32.0},
    Entry{"fahrenheit", "celsius", 5.0 / 9.0, -160.0 / 9.0},
    Entry{"kpa", "pa", 1000.0, 0.0},
    Entry{"pa", "kpa", 0.001, 0.0},
};

constexpr std::array<std::pair<std::string_view, std::string_view>, 16> kAliases = {{
    {"millisecond", "ms"},
    {"milliseconds", "ms"},
    {"sec", "s"},
    {"second", "s"},
    {"seconds", "s"},
    {"minute", "min"},
    {"minutes", "min"},
    {"meter", "m"},
    {"meters", "m"},
    {"centimeter", "cm"},
    {"centimeters", "cm"},
    {"c", "celsius"},
    {"°c", "celsius"},
    {"f", "fahrenheit"},
    {"°f", "fahrenheit"},
    {"kilopascal", "kpa"},
}};

}  // namespace

std::string normalize_unit(std::string_view unit) {
    std::string out;
    for (char c : unit) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    for (const auto& [alias, canonical] : kAliases) {
        if (out == alias) {
            return std::string(canonical);
        }
    }
    if (out == "pascal") {
        return "pa";
    }
    return out;
}

std::optional<UnitConversion> infer_unit_conversion(std::string_view source_unit, std::string_view target_unit) {
    std::string from = normalize_unit(source_unit);
    std::string to = normalize_unit(target_unit);
    if (from == to) {
        return UnitConversion{from, to, 1.0, 0.0};
    }
    auto it = std::find_if(kTable.begin(), kTable.end(), [&](const Entry& e) { return e.from == from && e.to == to; });
    if (it == kTable.end()) {
        return std::nullopt;
    }
    return UnitConversion{from, to, it->factor, it->offset};
}

}  // namespace gse
