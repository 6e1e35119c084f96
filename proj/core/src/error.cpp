#include "effortlab/error.hpp"

namespace effortlab {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kNotCola: return "not_cola";
    case ErrorCode::kInconsistentGrid: return "inconsistent_grid";
    case ErrorCode::kUndefinedTilt: return "undefined_tilt";
    case ErrorCode::kNoVoicing: return "no_voicing";
    case ErrorCode::kDegenerateStats: return "degenerate_stats";
    case ErrorCode::kNoActivity: return "no_activity";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kMaskerTooShort: return "masker_too_short";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kSequencing: return "sequencing";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kExhausted: return "exhausted";
    case ErrorCode::kSessionDone: return "session_done";
    case ErrorCode::kGone: return "gone";
  }
  return "unknown";
}

}  // namespace effortlab
