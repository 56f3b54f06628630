#pragma once

#include <stdexcept>
#include <string>

namespace linkage {

enum class Errc {
  EmptyPedigree,
  DuplicateIndividual,
  MissingParent,
  HalfSpecifiedParents,
  CycleDetected,
  LoopDetected,
  ParseError,
  InvalidArgument,
  InconsistentData,
  TooLargeToEnumerate,
  NullProbabilityZero,
  GridMissingNull,
  ZeroPowerRegion,
  ZeroReplicates,
  SupportMismatch,
  EmptyInput,
  NoInformativeTransmissions,
  ZeroTotalCount,
  NonSimplexInit,
  InsufficientIterates,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::EmptyPedigree: return "EmptyPedigree";
    case Errc::DuplicateIndividual: return "DuplicateIndividual";
    case Errc::MissingParent: return "MissingParent";
    case Errc::HalfSpecifiedParents: return "HalfSpecifiedParents";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::LoopDetected: return "LoopDetected";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InconsistentData: return "InconsistentData";
    case Errc::TooLargeToEnumerate: return "TooLargeToEnumerate";
    case Errc::NullProbabilityZero: return "NullProbabilityZero";
    case Errc::GridMissingNull: return "GridMissingNull";
    case Errc::ZeroPowerRegion: return "ZeroPowerRegion";
    case Errc::ZeroReplicates: return "ZeroReplicates";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NoInformativeTransmissions: return "NoInformativeTransmissions";
    case Errc::ZeroTotalCount: return "ZeroTotalCount";
    case Errc::NonSimplexInit: return "NonSimplexInit";
    case Errc::InsufficientIterates: return "InsufficientIterates";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; the
// code identifies the failure class so callers can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace detail
}  // namespace linkage
