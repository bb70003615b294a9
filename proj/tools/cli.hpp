#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cplan::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kConfigEnv = "CURTAIL_PLAN_CONFIG";

// A parsed command line: the subcommand and the options given explicitly
// (long names without dashes; positionals by their name).
struct Invocation {
  std::string command;
  std::map<std::string, std::string> options;
  std::optional<std::string> config_snapshot;  // set when replaying a manifest
};

// Parses and runs; returns 0 success, 1 validation, 2 I/O, 3 numerical.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

Invocation parse_invocation(const std::vector<std::string>& args);
void execute(const Invocation& inv, std::ostream& out);

// Rebuilds the invocation recorded in a manifest with its outputs redirected
// under `out_dir`, after checking the recorded input digests.
Invocation replay_invocation(const nlohmann::json& manifest, const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace cplan::cli
