#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecobounds/json_io.hpp"

namespace ecobounds::cli {

struct Context {
  std::string command;
  Json config;
  std::filesystem::path config_dir;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed_flag;
  std::string fingerprint;
  std::vector<std::string> files;
  Json summary = Json::object();

  std::uint64_t seed() const;
  std::vector<std::uint64_t> seeds() const;
  std::filesystem::path resolve(const std::string& path) const;
  // Writes text to out_dir/name and records the file.
  void write(const std::string& name, const std::string& text);
  void write_json(const std::string& name, Json j);
};

void cmd_ingest(Context& ctx);
void cmd_simulate(Context& ctx);
void cmd_estimate(Context& ctx);
void cmd_error_grid(Context& ctx);
void cmd_entropy(Context& ctx);
void cmd_delta_sweep(Context& ctx);
void cmd_benchmark(Context& ctx);

}  // namespace ecobounds::cli
