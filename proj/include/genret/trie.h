#pragma once

// Prefix tree over every docid (each terminated by the vocabulary sentinel);
// drives constrained decoding.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genret/common.h"
#include "genret/docid.h"

namespace genret {

class PrefixTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;
  static constexpr std::uint8_t kFormatVersion = 1;

  PrefixTrie() = default;

  /// Inserts every docid followed by `sentinel`. Throws kParameter on an
  /// empty list and kData on a duplicate docid.
  static PrefixTrie build(const std::vector<DocidSequence>& docids, TokenId sentinel);
  static PrefixTrie build(const DocidIndex& index);

  /// Tokens t, ascending, such that prefix + t is a prefix of a stored path.
  std::vector<TokenId> allowed_next(std::span<const TokenId> prefix) const;

  /// doc_key of `docid` (without the sentinel), if stored.
  std::optional<std::string> lookup(std::span<const TokenId> docid) const;

  /// Node reached by `prefix`, if any.
  std::optional<NodeId> find(std::span<const TokenId> prefix) const;
  /// Child of `node` via `token`, if any.
  std::optional<NodeId> child(NodeId node, TokenId token) const;
  std::span<const std::pair<TokenId, NodeId>> children(NodeId node) const {
    return nodes_[node].children;
  }
  /// Document index stored at `node`, or -1.
  std::int64_t terminal(NodeId node) const { return nodes_[node].doc; }

  TokenId sentinel() const { return sentinel_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t doc_count() const { return doc_keys_.size(); }
  const std::string& doc_key(std::size_t doc) const { return doc_keys_[doc]; }
  bool empty() const { return doc_keys_.empty(); }
  /// Approximate heap footprint in bytes.
  std::size_t memory_bytes() const;

  /// Binary layout documented in docs/trie_format.md.
  void save(const std::string& path) const;
  static PrefixTrie load(const std::string& path);

 private:
  struct Node {
    std::vector<std::pair<TokenId, NodeId>> children;  // sorted by token
    std::int64_t doc = -1;
  };

  NodeId add_child(NodeId node, TokenId token);

  std::vector<Node> nodes_;
  std::vector<std::string> doc_keys_;
  TokenId sentinel_ = 0;
};

}  // namespace genret
