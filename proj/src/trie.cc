#include "genret/trie.h"

#include <algorithm>
#include <bit>
#include <cstring>

#include "genret/io.h"

namespace genret {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'T', 'R'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  GENRET_REQUIRE(in.good(), ErrorKind::kFormat, "truncated trie file '" + path + "'");
  return value;
}

}  // namespace

PrefixTrie::NodeId PrefixTrie::add_child(NodeId node, TokenId token) {
  auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token,
                             [](const auto& c, TokenId t) { return c.first < t; });
  if (it != kids.end() && it->first == token) return it->second;
  const auto id = static_cast<NodeId>(nodes_.size());
  const auto pos = it - kids.begin();
  nodes_[node].children.insert(nodes_[node].children.begin() + pos, {token, id});
  nodes_.emplace_back();
  return id;
}

PrefixTrie PrefixTrie::build(const std::vector<DocidSequence>& docids, TokenId sentinel) {
  GENRET_REQUIRE(!docids.empty(), ErrorKind::kParameter, "cannot build a trie from no docids");
  PrefixTrie trie;
  trie.sentinel_ = sentinel;
  trie.nodes_.emplace_back();
  for (std::size_t d = 0; d < docids.size(); ++d) {
    NodeId node = kRoot;
    for (TokenId t : docids[d].tokens) {
      GENRET_REQUIRE(t != sentinel, ErrorKind::kData,
                     "docid of '" + docids[d].doc_key + "' contains the sentinel");
      node = trie.add_child(node, t);
    }
    node = trie.add_child(node, sentinel);
    GENRET_REQUIRE(trie.nodes_[node].doc < 0, ErrorKind::kData,
                   "duplicate docid for '" + docids[d].doc_key + "' and '" +
                       trie.doc_keys_[static_cast<std::size_t>(trie.nodes_[node].doc)] + "'");
    trie.nodes_[node].doc = static_cast<std::int64_t>(d);
    trie.doc_keys_.push_back(docids[d].doc_key);
  }
  return trie;
}

PrefixTrie PrefixTrie::build(const DocidIndex& index) {
  return build(index.docids, index.vocab.sentinel());
}

std::optional<PrefixTrie::NodeId> PrefixTrie::child(NodeId node, TokenId token) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), token,
                             [](const auto& c, TokenId t) { return c.first < t; });
  if (it == kids.end() || it->first != token) return std::nullopt;
  return it->second;
}

std::optional<PrefixTrie::NodeId> PrefixTrie::find(std::span<const TokenId> prefix) const {
  if (nodes_.empty()) return std::nullopt;
  NodeId node = kRoot;
  for (TokenId t : prefix) {
    const auto next = child(node, t);
    if (!next) return std::nullopt;
    node = *next;
  }
  return node;
}

std::vector<TokenId> PrefixTrie::allowed_next(std::span<const TokenId> prefix) const {
  std::vector<TokenId> out;
  const auto node = find(prefix);
  if (!node) return out;
  for (const auto& [token, next] : nodes_[*node].children) out.push_back(token);
  return out;
}

std::optional<std::string> PrefixTrie::lookup(std::span<const TokenId> docid) const {
  const auto node = find(docid);
  if (!node) return std::nullopt;
  const auto end = child(*node, sentinel_);
  if (!end) return std::nullopt;
  return doc_keys_[static_cast<std::size_t>(nodes_[*end].doc)];
}

std::size_t PrefixTrie::memory_bytes() const {
  std::size_t bytes = nodes_.capacity() * sizeof(Node);
  for (const auto& n : nodes_) bytes += n.children.capacity() * sizeof(n.children[0]);
  for (const auto& k : doc_keys_) bytes += sizeof(k) + k.capacity();
  return bytes;
}

void PrefixTrie::save(const std::string& path) const {
  auto out = open_output(path, true);
  out.write(kMagic, 4);
  put<std::uint8_t>(out, kFormatVersion);
  put<std::uint32_t>(out, sentinel_);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(doc_keys_.size()));
  for (const auto& key : doc_keys_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(key.size()));
    out.write(key.data(), static_cast<std::streamsize>(key.size()));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(nodes_.size()));
  // Preorder with children in ascending token order; explicit stack keeps
  // deep keyword docids off the call stack.
  std::vector<NodeId> stack{kRoot};
  while (!stack.empty()) {
    const NodeId node = stack.back();
    stack.pop_back();
    const auto& n = nodes_[node];
    put<std::int64_t>(out, n.doc);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(n.children.size()));
    for (const auto& [token, next] : n.children) put<std::uint32_t>(out, token);
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(it->second);
  }
  GENRET_REQUIRE(out.good(), ErrorKind::kIo, "failed writing trie '" + path + "'");
}

PrefixTrie PrefixTrie::load(const std::string& path) {
  auto in = open_input(path, true);
  char magic[4];
  in.read(magic, 4);
  GENRET_REQUIRE(in.good() && std::memcmp(magic, kMagic, 4) == 0, ErrorKind::kFormat,
                 "'" + path + "' is not a trie file");
  const auto version = get<std::uint8_t>(in, path);
  GENRET_REQUIRE(version == kFormatVersion, ErrorKind::kFormat,
                 "unsupported trie format version " + std::to_string(version));
  PrefixTrie trie;
  trie.sentinel_ = get<std::uint32_t>(in, path);
  const auto docs = get<std::uint32_t>(in, path);
  trie.doc_keys_.reserve(docs);
  for (std::uint32_t d = 0; d < docs; ++d) {
    const auto len = get<std::uint32_t>(in, path);
    std::string key(len, '\0');
    in.read(key.data(), len);
    GENRET_REQUIRE(in.good(), ErrorKind::kFormat, "truncated trie file '" + path + "'");
    trie.doc_keys_.push_back(std::move(key));
  }
  const auto count = get<std::uint32_t>(in, path);
  GENRET_REQUIRE(count >= 1, ErrorKind::kFormat, "corrupt trie file '" + path + "'");
  trie.nodes_.reserve(count);
  auto read_node = [&]() -> NodeId {
    GENRET_REQUIRE(trie.nodes_.size() < count, ErrorKind::kFormat,
                   "corrupt trie file '" + path + "'");
    const auto id = static_cast<NodeId>(trie.nodes_.size());
    Node n;
    n.doc = get<std::int64_t>(in, path);
    GENRET_REQUIRE(n.doc < static_cast<std::int64_t>(docs), ErrorKind::kFormat,
                   "corrupt trie file '" + path + "'");
    n.children.resize(get<std::uint32_t>(in, path));
    for (auto& child : n.children) child.first = get<std::uint32_t>(in, path);
    trie.nodes_.push_back(std::move(n));
    return id;
  };
  // (node, next child to read) frames mirror the preorder writer.
  std::vector<std::pair<NodeId, std::size_t>> stack{{read_node(), 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next == trie.nodes_[node].children.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t slot = next++;
    const NodeId parent = node;
    const NodeId id = read_node();
    trie.nodes_[parent].children[slot].second = id;
    stack.emplace_back(id, 0);
  }
  GENRET_REQUIRE(trie.nodes_.size() == count, ErrorKind::kFormat,
                 "corrupt trie file '" + path + "'");
  return trie;
}

}  // namespace genret
