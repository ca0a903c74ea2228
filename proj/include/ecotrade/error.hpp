#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ecotrade {

enum class ErrorCode : std::uint8_t {
  // core
  NotOwner,
  GameNotRunning,
  WouldViolateOwnObligation,
  UnknownPlayer,
  UnknownParcel,
  OutOfBounds,
  InvalidRules,
  TooFewParcels,
  GameNotFinished,
  // market
  BadQuantity,
  BadPrice,
  NotMaker,
  NotOpen,
  UnknownOffer,
  SelfTrade,
  SellerBelowObligation,
  // lobby / session
  UnknownGame,
  AlreadyStarted,
  NameTaken,
  NotCreator,
  NotInGame,
  AlreadyInGame,
  NotIdentified,
  StaleClientSeq,
  // protocol
  MalformedSyntax,
  UnknownType,
  MissingField,
  BadFieldType,
  // logs and files
  CorruptLog,
  DigestMismatch,
  UnknownKey,
  BadValue,
  Unreadable,
  IoFailure,
};

inline constexpr std::array<std::string_view, 34> kErrorCodeNames = {
    "NotOwner",        "GameNotRunning", "WouldViolateOwnObligation",
    "UnknownPlayer",   "UnknownParcel",  "OutOfBounds",
    "InvalidRules",    "TooFewParcels",  "GameNotFinished",
    "BadQuantity",     "BadPrice",       "NotMaker",
    "NotOpen",         "UnknownOffer",   "SelfTrade",
    "SellerBelowObligation",
    "UnknownGame",     "AlreadyStarted", "NameTaken",
    "NotCreator",      "NotInGame",      "AlreadyInGame",
    "NotIdentified",   "StaleClientSeq",
    "MalformedSyntax", "UnknownType",    "MissingField",
    "BadFieldType",
    "CorruptLog",      "DigestMismatch", "UnknownKey",
    "BadValue",        "Unreadable",     "IoFailure",
};

constexpr std::string_view to_string(ErrorCode code) {
  return kErrorCodeNames[static_cast<std::size_t>(code)];
}

constexpr std::optional<ErrorCode> parse_error_code(std::string_view name) {
  for (std::size_t i = 0; i < kErrorCodeNames.size(); ++i) {
    if (kErrorCodeNames[i] == name) return static_cast<ErrorCode>(i);
  }
  return std::nullopt;
}

/// Every rejected operation in the library throws this. Operations validate
/// before they mutate, so a caught Error means the target state is untouched.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail = {}, std::string field = {})
      : std::runtime_error(format(code, detail)),
        code_(code),
        detail_(std::move(detail)),
        field_(std::move(field)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  // Offending field path for MissingField, BadFieldType, UnknownKey, BadValue.
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(ErrorCode code, const std::string& detail) {
    std::string out(to_string(code));
    if (!detail.empty()) {
      out += ": ";
      out += detail;
    }
    return out;
  }

  ErrorCode code_;
  std::string detail_;
  std::string field_;
};

}  // namespace ecotrade
