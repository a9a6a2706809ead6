#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace changekit {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoFailure : public Error {
public:
  using Error::Error;
};

// --- corpus scanning -------------------------------------------------------

enum class CorpusIssueKind { MissingFile, CaptionCountMismatch, DuplicateSampleId, DimensionMismatch, BadIndex };

struct CorpusIssue {
  CorpusIssueKind kind;
  std::string sample_id;
  std::string detail;
};

std::string to_string(CorpusIssueKind kind);

/// Aggregated validation report: every failing sample of one scan.
class CorpusError : public Error {
public:
  explicit CorpusError(std::vector<CorpusIssue> issues);
  const std::vector<CorpusIssue>& issues() const noexcept { return issues_; }

private:
  std::vector<CorpusIssue> issues_;
};

// --- record files ----------------------------------------------------------

class MalformedLine : public Error {
public:
  MalformedLine(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class SchemaViolation : public Error {
public:
  SchemaViolation(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// --- raster ----------------------------------------------------------------

class DecodeFailure : public Error {
public:
  using Error::Error;
};

class UnknownPixelValue : public Error {
public:
  UnknownPixelValue(std::uint32_t rgb, std::size_t x, std::size_t y);
  std::uint32_t rgb() const noexcept { return rgb_; }
  std::size_t x() const noexcept { return x_; }
  std::size_t y() const noexcept { return y_; }

private:
  std::uint32_t rgb_;
  std::size_t x_, y_;
};

class BackgroundCategoryRequested : public Error {
public:
  BackgroundCategoryRequested() : Error("connected components requested for the background category") {}
};

// --- geometry --------------------------------------------------------------

class DegenerateResult : public Error {
public:
  using Error::Error;
};

class OutOfBoundsVertex : public Error {
public:
  using Error::Error;
};

class ParseFailure : public Error {
public:
  ParseFailure(std::size_t position, const std::string& reason);
  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

class CoordinateOutOfRange : public Error {
public:
  using Error::Error;
};

// --- generation / endpoints -------------------------------------------------

class MissingEvidence : public Error {
public:
  using Error::Error;
};

class UnparseableResponse : public Error {
public:
  using Error::Error;
};

class EndpointError : public Error {
public:
  using Error::Error;
};

/// Retryable failure reported by an endpoint (5xx, 429, connection reset).
class TransientEndpointError : public EndpointError {
public:
  using EndpointError::EndpointError;
};

class EndpointUnavailable : public EndpointError {
public:
  using EndpointError::EndpointError;
};

class AuthFailure : public EndpointError {
public:
  using EndpointError::EndpointError;
};

class Timeout : public EndpointError {
public:
  using EndpointError::EndpointError;
};

class MalformedResponse : public EndpointError {
public:
  using EndpointError::EndpointError;
};

// --- metrics / evaluation -------------------------------------------------

class EmptyHypothesis : public Error {
public:
  using Error::Error;
};

class CorpusTooSmall : public Error {
public:
  using Error::Error;
};

class LengthMismatch : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class Unparseable : public Error {
public:
  using Error::Error;
};

} // namespace changekit
