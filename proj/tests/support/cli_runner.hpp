#pragma once

// Spawns the command-line binary (path injected by the build) and captures
// stdout + exit code. POSIX popen; stderr is dropped.

#include <array>
#include <cstdio>
#include <string>

#include <sys/wait.h>

namespace testsupport {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline CliResult run_cli_at(const std::string& binary, const std::string& args,
                            const std::string& env = "") {
  std::string cmd = env.empty() ? binary + " " + args : env + " " + binary + " " + args;
  cmd += " 2>/dev/null";
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

}  // namespace testsupport
