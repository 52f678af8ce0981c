#include "wsseg/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wsseg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number '" + v + "' for key '" + key + "'");
  }
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    const std::int64_t i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer '" + v + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config: bad boolean '" + v + "' for key '" + key + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_double(v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_models(const std::vector<MoiModel>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + moi_to_string(v[i]);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  net.validate();
  train.validate();
  sweep.validate();
  if (gen_n < 1 || gen_size < 32) throw ConfigError("config: n must be >= 1 and size >= 32");
}

void apply_config_kv(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key), value = trim(raw_value);
  if (key.empty()) throw ConfigError("config: empty key");

  if (key == "batch_size") cfg.train.batch_size = static_cast<int>(parse_int(value, key));
  else if (key == "epochs") cfg.train.epochs = static_cast<int>(parse_int(value, key));
  else if (key == "max_lr") cfg.train.max_lr = parse_double(value, key);
  else if (key == "weight_decay") cfg.train.weight_decay = parse_double(value, key);
  else if (key == "ema_beta") cfg.train.ema_beta = parse_double(value, key);
  else if (key == "moi") cfg.train.moi = moi_from_string(value);
  else if (key == "power_n") cfg.train.power_n = parse_double(value, key);
  else if (key == "moi_epsilon") cfg.train.moi_epsilon = parse_double(value, key);
  else if (key == "seed") cfg.train.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "augment") cfg.train.augment = parse_bool(value, key);
  else if (key == "alpha") cfg.train.loss.alpha = parse_double(value, key);
  else if (key == "dice_epsilon") cfg.train.loss.dice_epsilon = parse_double(value, key);
  else if (key == "dropout_p") cfg.net.dropout_p = parse_double(value, key);
  else if (key == "init_channels") cfg.net.init_channels = static_cast<int>(parse_int(value, key));
  else if (key == "depth") cfg.net.depth = static_cast<int>(parse_int(value, key));
  else if (key == "pyramid_scales")
    cfg.net.pyramid_scales =
        parse_list<int>(value, [&](const std::string& s) { return static_cast<int>(parse_int(s, key)); });
  else if (key == "subsets") cfg.sweep.subsets = static_cast<int>(parse_int(value, key));
  else if (key == "k") cfg.sweep.k = static_cast<int>(parse_int(value, key));
  else if (key == "folds") cfg.sweep.folds = static_cast<int>(parse_int(value, key));
  else if (key == "sweep_seeds") cfg.sweep.seeds = static_cast<int>(parse_int(value, key));
  else if (key == "power_grid")
    cfg.sweep.power_grid =
        parse_list<double>(value, [&](const std::string& s) { return parse_double(s, key); });
  else if (key == "models")
    cfg.sweep.models =
        parse_list<MoiModel>(value, [](const std::string& s) { return moi_from_string(s); });
  else if (key == "oval_scale") cfg.sweep.oval_scale = parse_double(value, key);
  else if (key == "jobs") cfg.sweep.jobs = static_cast<int>(parse_int(value, key));
  else if (key == "manifest") cfg.manifest = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "n") cfg.gen_n = static_cast<int>(parse_int(value, key));
  else if (key == "size") cfg.gen_size = static_cast<int>(parse_int(value, key));
  else throw ConfigError("config: unknown key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    try {
      apply_config_kv(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "batch_size = " << cfg.train.batch_size << '\n'
      << "epochs = " << cfg.train.epochs << '\n'
      << "max_lr = " << fmt_double(cfg.train.max_lr) << '\n'
      << "weight_decay = " << fmt_double(cfg.train.weight_decay) << '\n'
      << "ema_beta = " << fmt_double(cfg.train.ema_beta) << '\n'
      << "moi = " << moi_to_string(cfg.train.moi) << '\n'
      << "power_n = " << fmt_double(cfg.train.power_n) << '\n'
      << "moi_epsilon = " << fmt_double(cfg.train.moi_epsilon) << '\n'
      << "seed = " << cfg.train.seed << '\n'
      << "augment = " << (cfg.train.augment ? "true" : "false") << '\n'
      << "alpha = " << fmt_double(cfg.train.loss.alpha) << '\n'
      << "dice_epsilon = " << fmt_double(cfg.train.loss.dice_epsilon) << '\n'
      << "dropout_p = " << fmt_double(cfg.net.dropout_p) << '\n'
      << "init_channels = " << cfg.net.init_channels << '\n'
      << "depth = " << cfg.net.depth << '\n'
      << "pyramid_scales = " << join_ints(cfg.net.pyramid_scales) << '\n'
      << "subsets = " << cfg.sweep.subsets << '\n'
      << "k = " << cfg.sweep.k << '\n'
      << "folds = " << cfg.sweep.folds << '\n'
      << "sweep_seeds = " << cfg.sweep.seeds << '\n'
      << "power_grid = " << join_doubles(cfg.sweep.power_grid) << '\n'
      << "models = " << join_models(cfg.sweep.models) << '\n'
      << "oval_scale = " << fmt_double(cfg.sweep.oval_scale) << '\n'
      << "jobs = " << cfg.sweep.jobs << '\n'
      << "manifest = " << cfg.manifest << '\n'
      << "out_dir = " << cfg.out_dir << '\n'
      << "n = " << cfg.gen_n << '\n'
      << "size = " << cfg.gen_size << '\n';
  return out.str();
}

std::string config_fingerprint(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_config_echo(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "# effective configuration, fingerprint " << config_fingerprint(cfg) << '\n'
    << serialize_config(cfg);
}

}  // namespace wsseg
