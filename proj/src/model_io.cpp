#include "mlz/model_io.hpp"

#include <fstream>
#include <set>

#include "mlz/errors.hpp"

namespace mlz {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw ModelFileError(std::string("model file is missing \"") + key + "\"");
  }
  return *it;
}

std::vector<double> number_array(const json& value, const char* key) {
  if (!value.is_array()) {
    throw ModelFileError(std::string("\"") + key + "\" must be an array");
  }
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) {
      throw ModelFileError(std::string("\"") + key + "\" must contain numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

} // namespace

MlzModel model_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw ModelFileError("model file must be a JSON object");
  }
  static const std::set<std::string> known{"n_states", "slopes", "offsets", "couplings", "labels"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw ModelFileError("unknown key \"" + key + "\" in model file");
    }
  }

  const json& n_json = require(doc, "n_states");
  if (!n_json.is_number_integer() || n_json.get<long long>() < 2) {
    throw ModelFileError("\"n_states\" must be an integer >= 2");
  }
  const auto n = static_cast<std::size_t>(n_json.get<long long>());

  MlzModel m;
  m.slopes = number_array(require(doc, "slopes"), "slopes");
  m.offsets = number_array(require(doc, "offsets"), "offsets");
  if (m.slopes.size() != n || m.offsets.size() != n) {
    throw ModelFileError("\"slopes\" and \"offsets\" must have n_states entries");
  }

  m.couplings = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const json& cj = require(doc, "couplings");
  if (!cj.is_array()) {
    throw ModelFileError("\"couplings\" must be an array");
  }
  static const std::set<std::string> coupling_keys{"row", "col", "re", "im"};
  std::set<std::pair<long long, long long>> seen;
  for (const auto& entry : cj) {
    if (!entry.is_object()) {
      throw ModelFileError("coupling entries must be objects");
    }
    for (const auto& [key, value] : entry.items()) {
      if (!coupling_keys.contains(key)) {
        throw ModelFileError("unknown key \"" + key + "\" in coupling entry");
      }
    }
    const json& row = require(entry, "row");
    const json& col = require(entry, "col");
    if (!row.is_number_integer() || !col.is_number_integer()) {
      throw ModelFileError("coupling row/col must be integers");
    }
    const long long r = row.get<long long>();
    const long long c = col.get<long long>();
    if (r < 1 || c < 1 || r > static_cast<long long>(n) || c > static_cast<long long>(n)) {
      throw ModelFileError("coupling index out of range (indices are one-based)");
    }
    if (r >= c) {
      throw ModelFileError("coupling entries must lie in the upper triangle (row < col)");
    }
    if (!seen.insert({r, c}).second) {
      throw ModelFileError("duplicate coupling entry");
    }
    const json& re = require(entry, "re");
    double im = 0.0;
    if (auto it = entry.find("im"); it != entry.end()) {
      if (!it->is_number()) {
        throw ModelFileError("coupling \"im\" must be a number");
      }
      im = it->get<double>();
    }
    if (!re.is_number()) {
      throw ModelFileError("coupling \"re\" must be a number");
    }
    const Complex value(re.get<double>(), im);
    m.couplings(r - 1, c - 1) = value;
    m.couplings(c - 1, r - 1) = std::conj(value);
  }

  if (auto it = doc.find("labels"); it != doc.end()) {
    if (!it->is_array() || it->size() != n) {
      throw ModelFileError("\"labels\" must be an array of n_states strings");
    }
    for (const auto& l : *it) {
      if (!l.is_string()) {
        throw ModelFileError("\"labels\" must contain strings");
      }
      m.labels.push_back(l.get<std::string>());
    }
  }
  return validate_model(std::move(m));
}

json model_to_json(const MlzModel& model) {
  json doc;
  doc["n_states"] = model.n_states();
  doc["slopes"] = model.slopes;
  doc["offsets"] = model.offsets;
  json couplings = json::array();
  const auto n = static_cast<Eigen::Index>(model.n_states());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex v = model.couplings(i, j);
      if (v != Complex{}) {
        couplings.push_back({{"row", i + 1}, {"col", j + 1}, {"re", v.real()}, {"im", v.imag()}});
      }
    }
  }
  doc["couplings"] = std::move(couplings);
  if (!model.labels.empty()) {
    doc["labels"] = model.labels;
  }
  return doc;
}

MlzModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ModelFileError("cannot open model file " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ModelFileError("cannot parse " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

} // namespace mlz
