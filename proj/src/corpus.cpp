#include "matan/corpus.hpp"

#include <cctype>
#include <fstream>

#include "matan/error.hpp"

namespace matan {

Vocab::Vocab() { add(kEmptyTokenString); }

TokenId Vocab::add(std::string_view token) {
  auto it = token_of_.find(std::string(token));
  if (it != token_of_.end()) return it->second;
  const auto id = static_cast<TokenId>(strings_.size());
  token_of_.emplace(std::string(token), id);
  strings_.emplace_back(token);
  counts_.push_back(0);
  return id;
}

const TokenId* Vocab::find(std::string_view token) const {
  auto it = token_of_.find(std::string(token));
  return it == token_of_.end() ? nullptr : &it->second;
}

NodeId Corpus::node(std::string_view external_id) const {
  auto it = node_of.find(std::string(external_id));
  if (it == node_of.end()) throw InputError("unknown document id '" + std::string(external_id) + "'");
  return it->second;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 128 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Corpus build_corpus(const std::vector<DocumentRecord>& records, std::size_t min_count,
                    std::size_t max_doc_len) {
  if (max_doc_len == 0) throw InputError("max_doc_len must be at least 1");
  Corpus corpus;
  std::vector<std::vector<std::string>> raw;
  raw.reserve(records.size());
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& rec : records) {
    if (!corpus.node_of.emplace(rec.id, static_cast<NodeId>(corpus.external_ids.size())).second) {
      throw InputError("duplicate document id '" + rec.id + "'");
    }
    corpus.external_ids.push_back(rec.id);
    auto tokens = tokenize(rec.text);
    if (tokens.size() > max_doc_len) tokens.resize(max_doc_len);
    for (const auto& t : tokens) ++counts[t];
    raw.push_back(std::move(tokens));
  }

  corpus.docs.reserve(raw.size());
  for (const auto& tokens : raw) {
    std::vector<TokenId> doc;
    for (const auto& t : tokens) {
      if (counts[t] < min_count) continue;
      const TokenId id = corpus.vocab.add(t);
      corpus.vocab.add_count(id);
      doc.push_back(id);
    }
    if (doc.empty()) doc.push_back(kEmptyToken);
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_documents(const std::filesystem::path& path, std::size_t min_count,
                      std::size_t max_doc_len) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open documents file " + path.string());
  std::vector<DocumentRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), lineno, "expected <id>\\t<text>");
    std::string id = line.substr(0, tab);
    if (id.empty()) throw ParseError(path.string(), lineno, "empty document id");
    if (auto [it, fresh] = seen.emplace(id, lineno); !fresh) {
      throw ParseError(path.string(), lineno,
                       "duplicate document id '" + id + "' (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    records.push_back({std::move(id), line.substr(tab + 1)});
  }
  return build_corpus(records, min_count, max_doc_len);
}

void save_documents(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (std::size_t n = 0; n < corpus.docs.size(); ++n) {
    out << corpus.external_ids[n] << '\t';
    bool first = true;
    for (TokenId t : corpus.docs[n]) {
      if (t == kEmptyToken) continue;
      if (!first) out << ' ';
      out << corpus.vocab.string_of(t);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace matan
