#pragma once

#include <iosfwd>

#include <nlohmann/json.hpp>

namespace mlz::cli {

using ojson = nlohmann::ordered_json;

// Pretty printer that keeps insertion order and formats floats with %.17g.
// Arrays of scalars stay on one line. Non-finite floats become null.
void write_json(const ojson& value, std::ostream& out);

} // namespace mlz::cli
