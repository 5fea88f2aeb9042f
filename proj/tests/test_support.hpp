#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <sys/wait.h>

namespace revdoe::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(REVDOE_DATA_DIR) / name;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs the CLI through the shell, capturing stdout. stderr goes to
/// `stderr_file` when given, otherwise it is discarded.
inline CommandResult run_cli(const std::string& args, const std::string& env = "",
                             const std::string& stderr_file = "") {
  const std::string redirect = stderr_file.empty() ? " 2>/dev/null" : " 2>" + stderr_file;
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + REVDOE_CLI_PATH + "\" " + args + redirect;
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace revdoe::testing
