#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mlz/model.hpp"

namespace mlz {

// Model file format (JSON):
//   {
//     "n_states": 2,
//     "slopes":  [1.0, 0.0],
//     "offsets": [0.0, 0.0],
//     "couplings": [{"row": 1, "col": 2, "re": 0.3, "im": 0.0}],
//     "labels": ["a", "b"]            (optional)
//   }
// Coupling entries use one-based indices and list the upper triangle only
// (row < col); the lower triangle follows from Hermiticity. Unknown keys are
// rejected. The parsed model is validated before it is returned.

MlzModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const MlzModel& model);

MlzModel load_model(const std::filesystem::path& path);

} // namespace mlz
