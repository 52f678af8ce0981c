#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wsseg/evaluation.hpp"
#include "wsseg/network.hpp"
#include "wsseg/train.hpp"

namespace wsseg {

// Flat "key = value" run configuration shared by every command. A '#' starts
// a comment. Flags override file values; the effective configuration is
// echoed next to the outputs, and its hash identifies the run.
struct RunConfig {
  NetConfig net;
  TrainConfig train;
  SweepConfig sweep;

  std::string manifest;  // dataset manifest path
  std::string out_dir = ".";

  // dataset generation
  int gen_n = 40;
  int gen_size = 64;

  void validate() const;
};

// Parse one file into cfg (later keys win). Unknown keys are format errors.
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);

// Apply one "key=value" pair.
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical serialization: fixed key order, round-trip-exact numbers.
std::string serialize_config(const RunConfig& cfg);

// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_fingerprint(const RunConfig& cfg);

void write_config_echo(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace wsseg
