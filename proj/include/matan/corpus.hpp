#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace matan {

using NodeId = std::uint32_t;
using TokenId = std::uint32_t;

/// Reserved token standing in for documents left empty after OOV removal.
/// Its embedding row is always zero.
inline constexpr TokenId kEmptyToken = 0;
inline constexpr std::string_view kEmptyTokenString = "<empty>";

inline constexpr std::size_t kDefaultMinCount = 5;
inline constexpr std::size_t kDefaultMaxDocLen = 300;

/// Token <-> id bijection. Id 0 is the reserved EMPTY token (count 0); the
/// remaining ids follow first appearance in the corpus.
class Vocab {
 public:
  Vocab();

  std::size_t size() const noexcept { return strings_.size(); }
  /// Returns the id, adding the token with count 0 if it is new.
  TokenId add(std::string_view token);
  const TokenId* find(std::string_view token) const;
  const std::string& string_of(TokenId id) const { return strings_.at(id); }
  std::size_t count(TokenId id) const { return counts_.at(id); }
  void add_count(TokenId id, std::size_t n = 1) { counts_.at(id) += n; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.strings_ == b.strings_ && a.counts_ == b.counts_;
  }

 private:
  std::unordered_map<std::string, TokenId> token_of_;
  std::vector<std::string> strings_;
  std::vector<std::size_t> counts_;
};

/// Node-indexed documents. NodeIds are dense, in file order.
struct Corpus {
  std::vector<std::vector<TokenId>> docs;
  std::vector<std::string> external_ids;
  std::unordered_map<std::string, NodeId> node_of;
  Vocab vocab;

  std::size_t n_nodes() const noexcept { return docs.size(); }
  /// Throws InputError on an unknown id.
  NodeId node(std::string_view external_id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.docs == b.docs && a.external_ids == b.external_ids && a.vocab == b.vocab;
  }
};

struct DocumentRecord {
  std::string id;
  std::string text;
};

/// Lowercase, split on every non-alphanumeric byte, drop empty pieces.
/// Non-ASCII bytes count as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Builds a corpus from in-memory records. Each document is tokenized and
/// head-truncated to max_doc_len tokens; tokens occurring fewer than
/// min_count times across the truncated documents are dropped; a document
/// left empty becomes [kEmptyToken]. Throws InputError on duplicate ids.
Corpus build_corpus(const std::vector<DocumentRecord>& records,
                    std::size_t min_count = kDefaultMinCount,
                    std::size_t max_doc_len = kDefaultMaxDocLen);

/// Reads `<external-id>\t<text>` lines. Blank lines are ignored.
Corpus load_documents(const std::filesystem::path& path,
                      std::size_t min_count = kDefaultMinCount,
                      std::size_t max_doc_len = kDefaultMaxDocLen);

/// Writes each document as `<external-id>\t<tokens joined by spaces>`;
/// EMPTY documents get an empty text field.
void save_documents(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace matan
