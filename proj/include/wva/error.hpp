#pragma once

#include <stdexcept>
#include <string>

namespace wva {

enum class ErrorKind {
  InvalidArgument,
  InvalidInput,
  EnergyBelowFloor,
  DenominatorBelowFloor,
  InfeasibleBudget,
  AllSamplesSingular,
  DegenerateBracket,
  NonlinearRegime,
  Io,
};

const char* to_string(ErrorKind kind);

/// Base of every error the library throws. Carries a machine-readable kind
/// so front ends can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define WVA_DEFINE_ERROR(Name)                                          \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Name, what) {} \
  };

WVA_DEFINE_ERROR(InvalidArgument)
WVA_DEFINE_ERROR(InvalidInput)
WVA_DEFINE_ERROR(EnergyBelowFloor)
WVA_DEFINE_ERROR(DenominatorBelowFloor)
WVA_DEFINE_ERROR(InfeasibleBudget)
WVA_DEFINE_ERROR(AllSamplesSingular)
WVA_DEFINE_ERROR(DegenerateBracket)
WVA_DEFINE_ERROR(NonlinearRegime)
WVA_DEFINE_ERROR(Io)

#undef WVA_DEFINE_ERROR

}  // namespace wva
