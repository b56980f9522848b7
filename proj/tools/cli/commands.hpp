#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "table.hpp"

namespace logcorr::cli {

/// Raised after the outputs are written when every estimate is censored.
class CensoredResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  Config config;
  std::string command;
  std::optional<std::filesystem::path> out_dir;
  std::string format = "csv";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  /// Writes `name.csv` / `name.json` under out_dir, or the table to `out`.
  void emit(const std::string& name, const Table& table) const;
  /// Writes a JSON document as `name.json` under out_dir, or to `out`.
  void emit_document(const std::string& name, const std::string& json) const;
  /// One-line summary: stdout when outputs go to files, stderr otherwise.
  void summary(const std::string& line) const;
  void warn(const std::string& line) const;
};

struct CommandInfo {
  std::string description;
  /// Config section that bare `--key` flags resolve into.
  std::string section;
  /// Bare flags mapped somewhere other than `section.key`.
  std::map<std::string, std::string> aliases;
  /// Name given to a single positional argument, if any.
  std::string positional;
  int (*run)(Context&);
};

const std::map<std::string, CommandInfo>& command_table();

/// Key for a bare flag of a command: dotted names pass through, then the
/// command aliases, then the shared aliases, then `section.name`.
std::string resolve_key(const CommandInfo& info, const std::string& name);

}  // namespace logcorr::cli
