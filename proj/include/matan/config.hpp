#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matan/attention.hpp"
#include "matan/trainer.hpp"

namespace matan {

/// Every setting a CLI run consumes. Defaults reproduce the published
/// experimental protocol: 256-dimensional GloVe with x_max 10, window 5 and
/// 50 epochs; one negative per positive; 10^5 positive pairs.
struct RunConfig {
  std::string subcommand;

  std::filesystem::path documents;
  std::filesystem::path edges;
  std::filesystem::path embeddings;
  std::filesystem::path model;
  std::filesystem::path out = "out";

  std::size_t dim = 256;
  std::size_t window = 5;
  double x_max = 10.0;
  std::size_t glove_epochs = 50;
  double glove_lr = 0.05;
  std::uint64_t glove_seed = 1;
  std::size_t min_count = 5;
  std::size_t max_doc_len = 300;

  std::size_t k = 1;
  std::size_t n_pairs = 100000;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  std::vector<double> train_fractions{0.5};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool full_corpus_embeddings = false;
  Pooling pooling = Pooling::kMean;
  PositiveSampling sampling = PositiveSampling::kUniformEdges;
  unsigned threads = 1;
  std::string kernels = "auto";

  std::string u;
  std::string v;
};

/// Reads flat `key=value` lines; `#` starts a comment, blank lines are
/// ignored, keys may use '-' or '_'. Keys come back with '-' separators.
/// Throws ParseError on a line without '='.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

/// Effective configuration as sorted `key=value` lines, readable back by
/// read_config_file.
std::string format_config(const RunConfig& cfg);

std::string pooling_name(Pooling p);
Pooling parse_pooling(const std::string& s);
std::string sampling_name(PositiveSampling s);
PositiveSampling parse_sampling(const std::string& s);

}  // namespace matan
