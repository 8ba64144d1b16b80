#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gse/schema.hpp"
#include "gse/stl.hpp"
#include "gse/value.hpp"

namespace gse {

/// Converts a non-null value to `to`. Supported pairs: identity,
/// integer->float, float->integer (only when the fraction is below 1e-9),
/// integer/float->string, string->integer/float (trimmed), boolean->string,
/// string->boolean (true/false/1/0, any case), string->enum (declared
/// variants only). Throws TransformError(CastError) otherwise.
Value cast_value(const Value& value, const FieldType& to);

/// Checks `value` against `type`: widens integers to floats, turns strings
/// into enum symbols and orders object fields by declaration. Absent or null
/// optional fields are omitted. Throws TransformError(EvalError) naming the
/// offending path.
Value conform_value(const Value& value, const FieldType& type, const std::string& path = {});
Value conform_record(const Value& record, const Schema& schema);

/// Runs `program` against `record`, which must conform to `source`. Throws
/// TransformError.
Value transform(const StlProgram& program, const Value& record, const Schema& source, const Schema& target);

/// Parses one record document and conforms it to `schema`. Throws ParseError.
Value parse_record(std::string_view text, const Schema& schema);
/// Single-line JSON rendering.
std::string serialize_record(const Value& record);

}  // namespace gse
