#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <cstdint>

namespace semmap::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kSchemaError = 3,
  kDegenerate = 4,
  kClockBackwards = 5,
};

struct RunArgs {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  bool export_ply = false;
};

struct HeadposeArgs {
  std::filesystem::path landmarks;
  std::optional<std::filesystem::path> model;
  std::filesystem::path intrinsics;
};

struct WillingnessArgs {
  std::filesystem::path timeline;
  std::optional<std::filesystem::path> config;
};

// Results go to `out`, diagnostics to `err`. Return value is the process exit code.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);
int cmd_headpose(const HeadposeArgs& args, std::ostream& out, std::ostream& err);
int cmd_willingness(const WillingnessArgs& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace semmap::cli
