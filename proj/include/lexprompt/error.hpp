#pragma once

#include <stdexcept>
#include <string>

namespace lexprompt {

// Base of every error raised by the library. Subclasses carry the
// structured fields callers need to report or recover.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyDescription : public Error {
 public:
  EmptyDescription() : Error("task description is empty") {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class MissingPlaceholder : public Error {
 public:
  explicit MissingPlaceholder(std::string name)
      : Error("no value for placeholder {" + name + "}"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LabelMismatch : public Error {
 public:
  LabelMismatch(std::string id, const std::string& gold)
      : Error("instance '" + id + "': gold '" + gold + "' is not a verbalizer label"),
        id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class BatchTooLarge : public Error {
 public:
  BatchTooLarge(std::size_t requested, std::size_t available)
      : Error("reference batch of " + std::to_string(requested) + " exceeds pool of " +
              std::to_string(available)) {}
};

class EmptyBatch : public Error {
 public:
  EmptyBatch() : Error("cannot evaluate an empty batch") {}
};

class OracleFailure : public Error {
 public:
  OracleFailure(std::string task_id, std::string cause)
      : Error(task_id.empty() ? "oracle failure: " + cause
                              : "oracle failure on task '" + task_id + "': " + cause),
        task_id_(std::move(task_id)),
        cause_(std::move(cause)) {}
  explicit OracleFailure(std::string cause) : OracleFailure({}, std::move(cause)) {}

  const std::string& task_id() const noexcept { return task_id_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  std::string task_id_;
  std::string cause_;
};

class AuthMissing : public Error {
 public:
  explicit AuthMissing(const std::string& env_var)
      : Error("API key environment variable '" + env_var + "' is not set") {}
};

class ProviderFailure : public Error {
 public:
  using Error::Error;
};

class BadMaskCount : public Error {
 public:
  explicit BadMaskCount(std::size_t found)
      : Error("masked text must contain exactly one [MASK], found " + std::to_string(found)) {}
};

class PositionOutOfRange : public Error {
 public:
  PositionOutOfRange(std::size_t position, std::size_t size)
      : Error("word position " + std::to_string(position) + " out of range for " +
              std::to_string(size) + " words") {}
};

class CorruptTrace : public Error {
 public:
  using Error::Error;
};

class CacheCorrupt : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexprompt
