#include "fang/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fang/error.hpp"
#include "fang/features.hpp"

namespace fang {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCategory::Config, "bad value for " + key + ": '" + value + "'");
}

}  // namespace

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) bad_value(key, v);
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

namespace {

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(key, trim(item))));
  if (out.empty()) bad_value(key, v);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double TrainConfig::resolved_time_scale() const {
  return time_scale > 0.0 ? time_scale : default_time_scale();
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCategory::Config, msg); };
  if (dim <= 0 || temporal_hidden <= 0 || stance_dim <= 0 || sage_hidden <= 0)
    fail("dimensions must be positive");
  if (2 * temporal_hidden != dim) fail("temporal_hidden must be half of dim (2e = d)");
  if (fanouts.empty()) fail("fanouts must name at least one layer");
  for (int f : fanouts)
    if (f <= 0) fail("fanouts must be positive");
  if (max_engagements <= 0) fail("max_engagements must be positive");
  if (time_scale < 0.0 || !std::isfinite(time_scale)) fail("time_scale must be positive (or 0 for the default)");
  if (walk_length <= 0 || walks_per_node <= 0 || negatives_per_node <= 0)
    fail("walk_length, walks_per_node and negatives_per_node must be positive");
  if (!(q >= 0.0) || !std::isfinite(q)) fail("q must be non-negative");
  if (anchors_per_batch < 0) fail("anchors_per_batch must be non-negative");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (patience < 1) fail("patience must be at least 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("adam moments must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
  if (!(train_frac > 0.0 && train_frac <= 1.0)) fail("train_frac must lie in (0, 1]");
  if (!(test_frac > 0.0 && test_frac < 1.0)) fail("test_frac must lie in (0, 1)");
  if (max_vocab == 0) fail("max_vocab must be positive");
}

KeyValues to_key_values(const TrainConfig& c) {
  std::string fan;
  for (std::size_t i = 0; i < c.fanouts.size(); ++i) fan += (i ? "," : "") + std::to_string(c.fanouts[i]);
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"dim", std::to_string(c.dim)},
      {"temporal_hidden", std::to_string(c.temporal_hidden)},
      {"stance_dim", std::to_string(c.stance_dim)},
      {"sage_hidden", std::to_string(c.sage_hidden)},
      {"fanouts", fan},
      {"normalize_output", b(c.normalize_output)},
      {"max_engagements", std::to_string(c.max_engagements)},
      {"time_scale", format_double(c.time_scale)},
      {"walk_length", std::to_string(c.walk_length)},
      {"walks_per_node", std::to_string(c.walks_per_node)},
      {"negatives_per_node", std::to_string(c.negatives_per_node)},
      {"q", format_double(c.q)},
      {"anchors_per_batch", std::to_string(c.anchors_per_batch)},
      {"batch_size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"patience", std::to_string(c.patience)},
      {"learning_rate", format_double(c.learning_rate)},
      {"beta1", format_double(c.beta1)},
      {"beta2", format_double(c.beta2)},
      {"adam_epsilon", format_double(c.adam_epsilon)},
      {"seed", std::to_string(c.seed)},
      {"train_frac", format_double(c.train_frac)},
      {"test_frac", format_double(c.test_frac)},
      {"disable_time", b(c.disable_time)},
      {"disable_stance_loss", b(c.disable_stance_loss)},
      {"disable_proximity_loss", b(c.disable_proximity_loss)},
      {"literal_proximity_sign", b(c.literal_proximity_sign)},
      {"max_vocab", std::to_string(c.max_vocab)},
  };
}

void apply_key_values(TrainConfig& c, KeyValues& kv) {
  for (auto it = kv.begin(); it != kv.end();) {
    const std::string& k = it->first;
    const std::string& v = it->second;
    bool used = true;
    if (k == "dim") c.dim = static_cast<int>(parse_int(k, v));
    else if (k == "temporal_hidden") c.temporal_hidden = static_cast<int>(parse_int(k, v));
    else if (k == "stance_dim") c.stance_dim = static_cast<int>(parse_int(k, v));
    else if (k == "sage_hidden") c.sage_hidden = static_cast<int>(parse_int(k, v));
    else if (k == "fanouts") c.fanouts = parse_int_list(k, v);
    else if (k == "normalize_output") c.normalize_output = parse_bool(k, v);
    else if (k == "max_engagements") c.max_engagements = static_cast<int>(parse_int(k, v));
    else if (k == "time_scale") c.time_scale = parse_real(k, v);
    else if (k == "walk_length") c.walk_length = static_cast<int>(parse_int(k, v));
    else if (k == "walks_per_node") c.walks_per_node = static_cast<int>(parse_int(k, v));
    else if (k == "negatives_per_node") c.negatives_per_node = static_cast<int>(parse_int(k, v));
    else if (k == "q") c.q = parse_real(k, v);
    else if (k == "anchors_per_batch") c.anchors_per_batch = static_cast<int>(parse_int(k, v));
    else if (k == "batch_size") c.batch_size = static_cast<int>(parse_int(k, v));
    else if (k == "epochs") c.epochs = static_cast<int>(parse_int(k, v));
    else if (k == "patience") c.patience = static_cast<int>(parse_int(k, v));
    else if (k == "learning_rate") c.learning_rate = parse_real(k, v);
    else if (k == "beta1") c.beta1 = parse_real(k, v);
    else if (k == "beta2") c.beta2 = parse_real(k, v);
    else if (k == "adam_epsilon") c.adam_epsilon = parse_real(k, v);
    else if (k == "seed") {
      const long long s = parse_int(k, v);
      if (s < 0) bad_value(k, v);
      c.seed = static_cast<std::uint64_t>(s);
    }
    else if (k == "train_frac") c.train_frac = parse_real(k, v);
    else if (k == "test_frac") c.test_frac = parse_real(k, v);
    else if (k == "disable_time") c.disable_time = parse_bool(k, v);
    else if (k == "disable_stance_loss") c.disable_stance_loss = parse_bool(k, v);
    else if (k == "disable_proximity_loss") c.disable_proximity_loss = parse_bool(k, v);
    else if (k == "literal_proximity_sign") c.literal_proximity_sign = parse_bool(k, v);
    else if (k == "max_vocab") {
      const long long m = parse_int(k, v);
      if (m <= 0) bad_value(k, v);
      c.max_vocab = static_cast<std::size_t>(m);
    }
    else used = false;
    it = used ? kv.erase(it) : std::next(it);
  }
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open config " + path.string());
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCategory::Config, "line " + std::to_string(line_no) + ": expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error(ErrorCategory::Config, "line " + std::to_string(line_no) + ": empty key", line_no);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void write_key_values(const KeyValues& kv, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

}  // namespace fang
