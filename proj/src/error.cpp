#include "cloudvision/error.hpp"

namespace cloudvision {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AngleNearPi: return "AngleNearPi";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::UnknownImageId: return "UnknownImageId";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::TooFewPoses: return "TooFewPoses";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace cloudvision
