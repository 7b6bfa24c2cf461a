#include "wva/error.hpp"

namespace wva {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::EnergyBelowFloor: return "EnergyBelowFloor";
    case ErrorKind::DenominatorBelowFloor: return "DenominatorBelowFloor";
    case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorKind::AllSamplesSingular: return "AllSamplesSingular";
    case ErrorKind::DegenerateBracket: return "DegenerateBracket";
    case ErrorKind::NonlinearRegime: return "NonlinearRegime";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace wva
