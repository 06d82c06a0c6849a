#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace testsupport {

struct CommandResult {
  int exit_code = -1;
  std::string out;  // stdout
  std::string err;  // stderr
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Runs a shell command with stdout/stderr captured separately.
inline CommandResult run_command(const std::string& command) {
  static std::mt19937_64 rng{std::random_device{}()};
  const auto dir = std::filesystem::temp_directory_path();
  const std::string tag = std::to_string(rng());
  const auto out_path = dir / ("cmd_out_" + tag);
  const auto err_path = dir / ("cmd_err_" + tag);

  const std::string full = command + " >" + out_path.string() + " 2>" +
                           err_path.string();
  int status = std::system(full.c_str());

  CommandResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return result;
}

// Quotes one shell argument (single-quote wrapping).
inline std::string shq(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& prefix) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto path = std::filesystem::temp_directory_path() /
              (prefix + "_" + std::to_string(rng()));
  std::filesystem::create_directories(path);
  return path;
}

}  // namespace testsupport
