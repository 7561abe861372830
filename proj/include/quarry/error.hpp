#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace quarry {

enum class ErrorCode {
  // document pipeline
  MalformedPdf,
  EncryptedPdf,
  NoAdapters,
  UnknownAdapter,
  PageOutOfRange,
  // tables
  UnknownDetector,
  EmptyRegion,
  PartialSpanOverlap,
  AlreadyUnit,
  IndexOutOfRange,
  CannotDeleteLast,
  InvalidTransition,
  NotFilled,
  // maps
  UnparsableLabel,
  InsufficientTicks,
  DegenerateTicks,
  PixelOutsideRegion,
  // annotations
  InvalidPattern,
  SpanOutOfRange,
  UnknownLabel,
  // integration
  NoHeaders,
  NoHeaderRowFound,
  SchemaMismatch,
  // service
  PermissionDenied,
  NotFound,
  DuplicateUsername,
  InvalidCredentials,
  Unauthenticated,
  LockHeldByOther,
  LockNotHeld,
  NotPrincipal,
  AlreadyAssigned,
  InvalidSortKey,
  InvalidArgument,
  // cli
  AddressInUse,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure carries a stable code. The HTTP layer serializes it
/// as {code, message, details}.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace quarry
