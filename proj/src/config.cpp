#include "llpdew/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace llpdew {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || value.empty() || errno == ERANGE) {
    throw std::runtime_error("config key '" + key + "': bad number '" + value +
                             "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() ||
      value.empty()) {
    throw std::runtime_error("config key '" + key + "': bad integer '" +
                             value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() ||
      value.empty()) {
    throw std::runtime_error("config key '" + key + "': bad seed '" + value +
                             "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("config key '" + key + "': bad boolean '" + value +
                           "' (use true/false)");
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;  // empty list: no hidden layers
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    if (comma == std::string::npos) comma = value.size();
    out.push_back(
        static_cast<int>(parse_integer(key, trim(value.substr(pos, comma - pos)))));
    pos = comma + 1;
  }
  return out;
}

bool is_auto(const std::string& value) { return value == "auto"; }

}  // namespace

void set_config_field(TrainConfig& config, const std::string& key,
                      const std::string& value) {
  if (key == "lambda") {
    config.lambda = parse_double(key, value);
  } else if (key == "beta_b") {
    config.beta_b = parse_double(key, value);
  } else if (key == "beta_i") {
    config.beta_i = parse_double(key, value);
  } else if (key == "bag_size") {
    config.bag_size = static_cast<int>(parse_integer(key, value));
  } else if (key == "bags_per_step") {
    if (is_auto(value)) {
      config.bags_per_step.reset();
    } else {
      config.bags_per_step = static_cast<int>(parse_integer(key, value));
    }
  } else if (key == "lr0") {
    config.lr0 = parse_double(key, value);
  } else if (key == "momentum") {
    config.momentum = parse_double(key, value);
  } else if (key == "weight_decay") {
    config.weight_decay = parse_double(key, value);
  } else if (key == "total_steps") {
    if (is_auto(value)) {
      config.total_steps.reset();
    } else {
      config.total_steps = parse_integer(key, value);
    }
  } else if (key == "epochs") {
    config.epochs = static_cast<int>(parse_integer(key, value));
  } else if (key == "seed") {
    if (is_auto(value)) {
      config.seed.reset();
    } else {
      config.seed = parse_u64(key, value);
    }
  } else if (key == "ablation_use_bag_weight") {
    config.ablation_use_bag_weight = parse_bool(key, value);
  } else if (key == "ablation_use_instance_weight") {
    config.ablation_use_instance_weight = parse_bool(key, value);
  } else if (key == "weak_noise_sigma") {
    if (is_auto(value)) {
      config.weak_noise_sigma.reset();
    } else {
      config.weak_noise_sigma = parse_double(key, value);
    }
  } else if (key == "strong_noise_sigma") {
    if (is_auto(value)) {
      config.strong_noise_sigma.reset();
    } else {
      config.strong_noise_sigma = parse_double(key, value);
    }
  } else if (key == "strong_dropout_rate") {
    config.strong_dropout_rate = parse_double(key, value);
  } else if (key == "hidden_sizes") {
    config.hidden_sizes = parse_int_list(key, value);
  } else {
    throw std::runtime_error("unknown config key '" + key + "'");
  }
}

TrainConfig parse_config_text(const std::string& text,
                              const std::string& origin) {
  TrainConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_number;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": expected key = value, got '"
          << line << "'";
      throw std::runtime_error(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": duplicate key '" << key << "'";
      throw std::runtime_error(msg.str());
    }
    try {
      set_config_field(config, key, value);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << origin << ":" << line_number << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
  }
  return config;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

void apply_overrides(TrainConfig& config,
                     const std::vector<std::string>& overrides) {
  for (const std::string& item : overrides) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("--set expects key=value, got '" + item + "'");
    }
    set_config_field(config, trim(item.substr(0, eq)),
                     trim(item.substr(eq + 1)));
  }
}

std::vector<std::string> validate_config(const TrainConfig& config) {
  std::vector<std::string> problems;
  auto bad = [&problems](const std::string& msg) { problems.push_back(msg); };
  if (config.lambda < 0) bad("lambda must be >= 0");
  if (config.beta_b <= 0) bad("beta_b must be > 0");
  if (config.beta_i <= 0) bad("beta_i must be > 0");
  if (config.bag_size <= 0) bad("bag_size must be a positive integer");
  if (config.bags_per_step && *config.bags_per_step <= 0) {
    bad("bags_per_step must be a positive integer or auto");
  }
  if (config.lr0 <= 0) bad("lr0 must be > 0");
  if (config.momentum < 0 || config.momentum >= 1) {
    bad("momentum must lie in [0,1)");
  }
  if (config.weight_decay < 0) bad("weight_decay must be >= 0");
  if (config.total_steps && *config.total_steps <= 0) {
    bad("total_steps must be a positive integer or auto");
  }
  if (config.epochs < 0) bad("epochs must be >= 0");
  if (config.weak_noise_sigma && *config.weak_noise_sigma < 0) {
    bad("weak_noise_sigma must be >= 0 or auto");
  }
  if (config.strong_noise_sigma && *config.strong_noise_sigma < 0) {
    bad("strong_noise_sigma must be >= 0 or auto");
  }
  if (config.strong_dropout_rate < 0 || config.strong_dropout_rate >= 1) {
    bad("strong_dropout_rate must lie in [0,1)");
  }
  for (int h : config.hidden_sizes) {
    if (h <= 0) {
      bad("hidden_sizes entries must be positive integers");
      break;
    }
  }
  return problems;
}

std::string serialize_config(const TrainConfig& config) {
  std::ostringstream out;
  char buf[64];
  auto real = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "lambda = " << real(config.lambda) << "\n";
  out << "beta_b = " << real(config.beta_b) << "\n";
  out << "beta_i = " << real(config.beta_i) << "\n";
  out << "bag_size = " << config.bag_size << "\n";
  out << "bags_per_step = "
      << (config.bags_per_step ? std::to_string(*config.bags_per_step)
                               : std::string("auto"))
      << "\n";
  out << "lr0 = " << real(config.lr0) << "\n";
  out << "momentum = " << real(config.momentum) << "\n";
  out << "weight_decay = " << real(config.weight_decay) << "\n";
  out << "total_steps = "
      << (config.total_steps ? std::to_string(*config.total_steps)
                             : std::string("auto"))
      << "\n";
  out << "epochs = " << config.epochs << "\n";
  out << "seed = "
      << (config.seed ? std::to_string(*config.seed) : std::string("auto"))
      << "\n";
  out << "ablation_use_bag_weight = "
      << (config.ablation_use_bag_weight ? "true" : "false") << "\n";
  out << "ablation_use_instance_weight = "
      << (config.ablation_use_instance_weight ? "true" : "false") << "\n";
  out << "weak_noise_sigma = "
      << (config.weak_noise_sigma ? real(*config.weak_noise_sigma)
                                  : std::string("auto"))
      << "\n";
  out << "strong_noise_sigma = "
      << (config.strong_noise_sigma ? real(*config.strong_noise_sigma)
                                    : std::string("auto"))
      << "\n";
  out << "strong_dropout_rate = " << real(config.strong_dropout_rate) << "\n";
  out << "hidden_sizes = ";
  for (std::size_t i = 0; i < config.hidden_sizes.size(); ++i) {
    if (i) out << ",";
    out << config.hidden_sizes[i];
  }
  out << "\n";
  return out.str();
}

}  // namespace llpdew
