#include "json_writer.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "mlz/cli.hpp"

namespace mlz::cli {
namespace {

bool is_scalar(const ojson& v) { return !v.is_array() && !v.is_object(); }

void write_scalar(const ojson& v, std::ostream& out) {
  if (v.is_number_float()) {
    const double x = v.get<double>();
    out << (std::isfinite(x) ? format_number(x) : std::string("null"));
  } else {
    out << v.dump();
  }
}

void write_value(const ojson& v, std::ostream& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close_pad(2 * depth, ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (const auto& [key, item] : v.items()) {
      if (!first) out << ",\n";
      first = false;
      out << pad << ojson(key).dump() << ": ";
      write_value(item, out, depth + 1);
    }
    out << '\n' << close_pad << '}';
  } else if (v.is_array()) {
    if (v.empty()) {
      out << "[]";
      return;
    }
    bool flat = true;
    for (const auto& item : v) flat = flat && is_scalar(item);
    if (flat) {
      out << '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out << ", ";
        write_scalar(v[i], out);
      }
      out << ']';
      return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out << ",\n";
      out << pad;
      write_value(v[i], out, depth + 1);
    }
    out << '\n' << close_pad << ']';
  } else {
    write_scalar(v, out);
  }
}

} // namespace

void write_json(const ojson& value, std::ostream& out) {
  write_value(value, out, 0);
  out << '\n';
}

} // namespace mlz::cli
