// Copyright (c) 2026 The heights authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heights {

enum class ErrorCode {
    // las-io
    BadMagic,
    UnsupportedVersion,
    UnsupportedPointFormat,
    InvalidHeader,
    Truncated,
    QuantizationOverflow,
    InvalidRecord,
    MalformedLine,
    Io,
    // grid / gapfill / heightmodel
    EmptyInput,
    AllNoData,
    InsufficientDonors,
    SpecMismatch,
    // masks / zonal / export
    ParseError,
    InvalidMask,
    EmptyObject,
    MissingGeometry,
    // cli
    Config,
    InvalidArgument,
};

inline constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedPointFormat: return "UnsupportedPointFormat";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::QuantizationOverflow: return "QuantizationOverflow";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllNoData: return "AllNoData";
    case ErrorCode::InsufficientDonors: return "InsufficientDonors";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidMask: return "InvalidMask";
    case ErrorCode::EmptyObject: return "EmptyObject";
    case ErrorCode::MissingGeometry: return "MissingGeometry";
    case ErrorCode::Config: return "Config";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

// Every failure raised by the library carries a code so callers can branch
// without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    // Message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

// Same error with `context` (usually a file path) prepended to the message.
inline Error with_context(const Error& e, const std::string& context) {
    return Error(e.code(), context + ": " + e.message());
}

// MalformedLine keeps the 1-based line number for callers that report it.
class LineError : public Error {
public:
    LineError(std::size_t line, const std::string& message)
        : Error(ErrorCode::MalformedLine, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace heights
