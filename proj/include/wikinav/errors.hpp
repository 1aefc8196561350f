#pragma once

#include <stdexcept>
#include <string>

#include "wikinav/types.hpp"

namespace wikinav {

/// The caller broke a precondition (out-of-range id, dimension mismatch, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or payload does not follow its declared layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid benchmark or command configuration, detected before any work runs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProviderError : public std::runtime_error {
 public:
  ProviderError(NodeId node, const std::string& what)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  NodeId node() const noexcept { return node_; }

 private:
  NodeId node_;
};

/// No legal move exists from the current node.
class DeadEndError : public std::runtime_error {
 public:
  DeadEndError(NodeId node, const std::string& what)
      : std::runtime_error(what), node_(node) {}
  NodeId node() const noexcept { return node_; }

 private:
  NodeId node_;
};

class IllegalMove : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GameFinished : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wikinav
