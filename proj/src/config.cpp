#include "matan/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "matan/error.hpp"
#include "matan/format.hpp"

namespace matan {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path.string(), lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ParseError(path.string(), lineno, "empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

std::string format_config(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  std::ostringstream num;
  auto put = [&]<typename T>(const std::string& k, const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      kv[k] = format_double(v);
    } else {
      num.str("");
      num << v;
      kv[k] = num.str();
    }
  };
  kv["subcommand"] = c.subcommand;
  kv["documents"] = c.documents.string();
  kv["edges"] = c.edges.string();
  kv["embeddings"] = c.embeddings.string();
  kv["model"] = c.model.string();
  kv["out"] = c.out.string();
  put("dim", c.dim);
  put("window", c.window);
  put("x-max", c.x_max);
  put("glove-epochs", c.glove_epochs);
  put("glove-lr", c.glove_lr);
  put("glove-seed", c.glove_seed);
  put("min-count", c.min_count);
  put("max-doc-len", c.max_doc_len);
  put("k", c.k);
  put("n-pairs", c.n_pairs);
  put("lr", c.lr);
  put("batch-size", c.batch_size);
  put("seed", c.seed);
  kv["train-fraction"] = join(c.train_fractions);
  kv["seeds"] = join(c.seeds);
  kv["full-corpus-embeddings"] = c.full_corpus_embeddings ? "true" : "false";
  kv["pooling"] = pooling_name(c.pooling);
  kv["sampling"] = sampling_name(c.sampling);
  put("threads", c.threads);
  kv["kernels"] = c.kernels;
  kv["u"] = c.u;
  kv["v"] = c.v;

  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string pooling_name(Pooling p) { return p == Pooling::kMean ? "mean" : "sum"; }

Pooling parse_pooling(const std::string& s) {
  if (s == "mean") return Pooling::kMean;
  if (s == "sum") return Pooling::kSum;
  throw InputError("pooling must be 'mean' or 'sum', got '" + s + "'");
}

std::string sampling_name(PositiveSampling s) {
  return s == PositiveSampling::kUniformEdges ? "uniform-edges" : "m-weighted";
}

PositiveSampling parse_sampling(const std::string& s) {
  if (s == "uniform-edges") return PositiveSampling::kUniformEdges;
  if (s == "m-weighted") return PositiveSampling::kRowWeighted;
  throw InputError("sampling must be 'uniform-edges' or 'm-weighted', got '" + s + "'");
}

}  // namespace matan
