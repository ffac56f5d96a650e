#pragma once

#include <stdexcept>
#include <string>

namespace darcy {

/// Base class for all domain-specific failures raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ExpectedCountOverflow : public Error {
  public:
    using Error::Error;
};

class DegenerateAnnulus : public Error {
  public:
    using Error::Error;
};

class DegenerateExponent : public Error {
  public:
    using Error::Error;
};

class UnderResolvedBall : public Error {
  public:
    using Error::Error;
};

class UnderResolvedHole : public Error {
  public:
    using Error::Error;
};

class SolverDiverged : public Error {
  public:
    using Error::Error;
};

class QuadratureUnderResolved : public Error {
  public:
    using Error::Error;
};

class InadmissibleLaw : public Error {
  public:
    using Error::Error;
};

class CellOverlap : public Error {
  public:
    using Error::Error;
};

class HierarchyInfeasible : public Error {
  public:
    using Error::Error;
};

class ConfigInvalid : public Error {
  public:
    explicit ConfigInvalid(const std::string& field, const std::string& why)
        : Error("invalid config field '" + field + "': " + why), field_(field) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

class PipelineFailed : public Error {
  public:
    using Error::Error;
};

class SchemaMismatch : public Error {
  public:
    using Error::Error;
};

} // namespace darcy
