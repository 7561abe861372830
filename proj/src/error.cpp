#include "quarry/error.hpp"

namespace quarry {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedPdf: return "MalformedPdf";
    case ErrorCode::EncryptedPdf: return "EncryptedPdf";
    case ErrorCode::NoAdapters: return "NoAdapters";
    case ErrorCode::UnknownAdapter: return "UnknownAdapter";
    case ErrorCode::PageOutOfRange: return "PageOutOfRange";
    case ErrorCode::UnknownDetector: return "UnknownDetector";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::PartialSpanOverlap: return "PartialSpanOverlap";
    case ErrorCode::AlreadyUnit: return "AlreadyUnit";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CannotDeleteLast: return "CannotDeleteLast";
    case ErrorCode::InvalidTransition: return "InvalidTransition";
    case ErrorCode::NotFilled: return "NotFilled";
    case ErrorCode::UnparsableLabel: return "UnparsableLabel";
    case ErrorCode::InsufficientTicks: return "InsufficientTicks";
    case ErrorCode::DegenerateTicks: return "DegenerateTicks";
    case ErrorCode::PixelOutsideRegion: return "PixelOutsideRegion";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NoHeaders: return "NoHeaders";
    case ErrorCode::NoHeaderRowFound: return "NoHeaderRowFound";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::PermissionDenied: return "PermissionDenied";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DuplicateUsername: return "DuplicateUsername";
    case ErrorCode::InvalidCredentials: return "InvalidCredentials";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::LockHeldByOther: return "LockHeldByOther";
    case ErrorCode::LockNotHeld: return "LockNotHeld";
    case ErrorCode::NotPrincipal: return "NotPrincipal";
    case ErrorCode::AlreadyAssigned: return "AlreadyAssigned";
    case ErrorCode::InvalidSortKey: return "InvalidSortKey";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AddressInUse: return "AddressInUse";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace quarry
