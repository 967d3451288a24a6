#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rhetprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed RST-S input. offset is a byte offset into the parsed string.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ArityError : public Error {
 public:
  ArityError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownRelation : public Error {
 public:
  explicit UnknownRelation(const std::string& label)
      : Error("unknown relation label '" + label + "'"), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class LengthError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, int epoch = -1)
      : Error(epoch >= 0 ? what + " (epoch " + std::to_string(epoch) + ")" : what),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class EmptyBatch : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class MissingEmbedding : public Error {
 public:
  MissingEmbedding(const std::string& doc_id, const std::string& model, const std::string& path)
      : Error("missing embedding for doc '" + doc_id + "' model '" + model + "': " + path) {}
};

// Problems with a plan, manifest or flags rather than with the data itself.
class PlanError : public Error {
 public:
  using Error::Error;
};

}  // namespace rhetprobe
