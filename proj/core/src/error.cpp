#include "fairens/error.hpp"

namespace fairens {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableValue: return "UnparseableValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::NoSensitiveAttributes: return "NoSensitiveAttributes";
    case ErrorCode::DegenerateAttribute: return "DegenerateAttribute";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonBinaryTask: return "NonBinaryTask";
    case ErrorCode::ConstantVector: return "ConstantVector";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::NoUsefulWeakLearner: return "NoUsefulWeakLearner";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::NegativeKL: return "NegativeKL";
    case ErrorCode::NotADistribution: return "NotADistribution";
    case ErrorCode::DivergentSupport: return "DivergentSupport";
    case ErrorCode::InvalidLambda: return "InvalidLambda";
    case ErrorCode::EmptySelector: return "EmptySelector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) noexcept {
  return code != ErrorCode::InvariantViolation;
}

}  // namespace fairens
