#pragma once

#include <stdexcept>
#include <string>

namespace mlz {

// Base of every error raised by the library. The CLI maps any of these to a
// nonzero exit code.
class MlzError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// model-core
class InvalidModel : public MlzError {
public:
  using MlzError::MlzError;
};
class HermiticityViolation : public InvalidModel {
public:
  using InvalidModel::InvalidModel;
};
class DegenerateSlopeCoupling : public InvalidModel {
public:
  using InvalidModel::InvalidModel;
};
class DuplicateLevel : public InvalidModel {
public:
  using InvalidModel::InvalidModel;
};
class EigensolverNoConvergence : public MlzError {
public:
  using MlzError::MlzError;
};
class ModelFileError : public MlzError {
public:
  using MlzError::MlzError;
};

// propagator
class InvalidIntegratorConfig : public MlzError {
public:
  using MlzError::MlzError;
};
class InvalidState : public MlzError {
public:
  using MlzError::MlzError;
};
class StepUnderflow : public MlzError {
public:
  using MlzError::MlzError;
};
class NormDrift : public MlzError {
public:
  using MlzError::MlzError;
};
class UnitarityViolation : public MlzError {
public:
  using MlzError::MlzError;
};
class NotConverged : public MlzError {
public:
  using MlzError::MlzError;
};

// semiclassical
class SimultaneousSharedCrossing : public MlzError {
public:
  using MlzError::MlzError;
};
class PathExplosion : public MlzError {
public:
  using MlzError::MlzError;
};

// analytic
class NonpositiveSlopeGap : public MlzError {
public:
  using MlzError::MlzError;
};
class InvalidPresetParams : public MlzError {
public:
  using MlzError::MlzError;
};

// cli
class SweepFailed : public MlzError {
public:
  using MlzError::MlzError;
};

} // namespace mlz
