#include "ecobounds_cli/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "ecobounds/error.hpp"
#include "ecobounds/experiments.hpp"
#include "ecobounds/parallel.hpp"

namespace ecobounds::cli {

namespace fs = std::filesystem;

namespace {

using Handler = std::function<void(Context&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"ingest", cmd_ingest},         {"simulate", cmd_simulate}, {"estimate", cmd_estimate},
      {"error-grid", cmd_error_grid}, {"entropy", cmd_entropy},   {"delta-sweep", cmd_delta_sweep},
      {"benchmark", cmd_benchmark},
  };
  return table;
}

Json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

void check_manifest(const Context& ctx) {
  const fs::path manifest = ctx.out_dir / "manifest.json";
  if (!fs::exists(manifest)) return;
  std::ifstream in(manifest);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("unreadable manifest in output directory: " + manifest.string());
  }
  const std::string old = j.value("fingerprint", "");
  if (old != ctx.fingerprint) {
    throw ConfigError("output directory holds results of a different config (fingerprint " + old +
                      "); refusing to overwrite");
  }
}

void write_manifest(const Context& ctx) {
  Json m;
  m["command"] = ctx.command;
  m["fingerprint"] = ctx.fingerprint;
  m["tool_version"] = kToolVersion;
  m["seed"] = ctx.seed();
  m["files"] = ctx.files;
  m["summary"] = ctx.summary;
  std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw DataError("cannot write manifest");
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  Json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
}

}  // namespace

std::string fingerprint(const std::string& command, const Json& config) {
  const nlohmann::json canonical = nlohmann::json::parse(config.dump());
  const std::string text = command + '\n' + canonical.dump() + '\n' + kToolVersion;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds on treatment effects conditional on covariates unseen in the study"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
  for (const auto& [name, handler] : handlers()) {
    (void)handler;
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "Base seed, overrides the config");
    sub->add_option("--threads", threads, "Worker threads (default ECOBOUNDS_THREADS, then all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory");
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    error_record(err, "config", e.what(), exit_code(ErrorKind::config));
    return exit_code(ErrorKind::config);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    set_thread_budget(resolve_thread_budget(threads));
    Context ctx;
    ctx.command = command;
    ctx.config = read_config(config_path);
    if (!ctx.config.is_object()) throw ConfigError("config must be a JSON object");
    ctx.config_dir = fs::absolute(fs::path(config_path)).parent_path();
    ctx.out_dir = out_dir;
    ctx.seed_flag = seed;
    Json keyed = ctx.config;
    if (seed) keyed["__seed"] = *seed;
    ctx.fingerprint = fingerprint(command, keyed);
    fs::create_directories(ctx.out_dir);
    check_manifest(ctx);
    handlers().at(command)(ctx);
    write_manifest(ctx);
    out << Json{{"command", command}, {"fingerprint", ctx.fingerprint}, {"files", ctx.files}}.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    error_record(err, to_string(e.kind()), e.what(), exit_code(e.kind()));
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    error_record(err, "data", e.what(), exit_code(ErrorKind::data));
    return exit_code(ErrorKind::data);
  }
}

}  // namespace ecobounds::cli
