#include "rbto/error.hpp"

namespace rbto {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParameter: return "invalid_parameter";
    case ErrorCode::SizeMismatch: return "size_mismatch";
    case ErrorCode::StructuralSingularity: return "structural_singularity";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Inconsistent: return "inconsistent";
    case ErrorCode::IllPosedFit: return "ill_posed_fit";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

} // namespace rbto
