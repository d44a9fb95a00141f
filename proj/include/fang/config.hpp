#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fang {

using KeyValues = std::map<std::string, std::string>;

struct TrainConfig {
  // dimensions
  int dim = 64;              // d
  int temporal_hidden = 32;  // e, must satisfy 2e = d
  int stance_dim = 16;       // d_c
  int sage_hidden = 64;
  std::vector<int> fanouts{10, 5};
  bool normalize_output = true;

  // sequences and sampling
  int max_engagements = 100;  // L
  double time_scale = 0.0;    // 0 selects ln(1 + 336)
  int walk_length = 3;
  int walks_per_node = 5;
  int negatives_per_node = 10;
  double q = 10.0;
  int anchors_per_batch = 0;  // 0 spreads every entity over the epoch's batches

  // optimisation
  int batch_size = 64;  // T
  int epochs = 300;
  int patience = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  // data split: test_frac is held out; train_frac is the labeled share of the rest
  double train_frac = 1.0;
  double test_frac = 0.2;

  // ablations
  bool disable_time = false;
  bool disable_stance_loss = false;
  bool disable_proximity_loss = false;
  bool literal_proximity_sign = false;

  std::size_t max_vocab = 5000;

  double resolved_time_scale() const;
  // Throws Error(Config) naming the first violated constraint.
  void validate() const;
};

KeyValues to_key_values(const TrainConfig& cfg);
// Unknown keys are left in `kv` for the caller; recognised ones are removed.
void apply_key_values(TrainConfig& cfg, KeyValues& kv);

// Flat `key = value` file; '#' starts a comment.
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(const KeyValues& kv, const std::filesystem::path& path);

std::string format_double(double v);

// Value parsers shared by every key-value consumer; Error(Config) naming the
// key on malformed input.
long long parse_int(const std::string& key, const std::string& v);
double parse_real(const std::string& key, const std::string& v);
bool parse_bool(const std::string& key, const std::string& v);

}  // namespace fang
