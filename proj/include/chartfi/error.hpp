#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace chartfi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (malformed fact, bad dataset line, bad config).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}

  /// Name of the offending field, empty when the error is not field-specific.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ProviderErrorKind { Transport, RateLimit, MalformedJson, Rejected };

/// Failure talking to a model provider. Transport and rate-limit errors are retryable.
class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what, std::string raw_text = {})
      : Error(what), kind_(kind), raw_text_(std::move(raw_text)) {}

  ProviderErrorKind kind() const noexcept { return kind_; }
  bool retryable() const noexcept {
    return kind_ == ProviderErrorKind::Transport || kind_ == ProviderErrorKind::RateLimit;
  }
  /// Last raw response text, kept for audit when JSON parsing gave up.
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  ProviderErrorKind kind_;
  std::string raw_text_;
};

/// Adjudicator produced a verdict that stays inconsistent after the repair re-prompt.
class JudgeError : public Error {
 public:
  JudgeError(const std::string& what, std::string raw_text)
      : Error(what), raw_text_(std::move(raw_text)) {}
  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

}  // namespace chartfi
