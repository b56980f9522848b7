#include "app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

#include "commands.hpp"
#include "logcorr/errors.hpp"

namespace logcorr::cli {

namespace {

struct Globals {
  std::string config_path, seed, out_dir, format = "csv", workers;
};

bool is_global(const std::string& name) {
  return name == "config" || name == "seed" || name == "workers" || name == "out" || name == "format";
}

void set_global(Globals& g, const std::string& name, const std::string& value) {
  if (name == "config") g.config_path = value;
  if (name == "seed") g.seed = value;
  if (name == "workers") g.workers = value;
  if (name == "out") g.out_dir = value;
  if (name == "format") g.format = value;
}

// Tokens after the subcommand are `--key=value`, `--key value`, a bare
// `--flag`, or the command's single positional argument. Global flags may
// appear here too.
void apply_overrides(const CommandInfo& info, const std::vector<std::string>& tokens, Globals& globals,
                     Config& config) {
  bool positional_used = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok.rfind("--", 0) != 0) {
      if (info.positional.empty() || positional_used) throw ValidationError("unexpected argument '" + tok + "'");
      config.set(info.section + "." + info.positional, tok);
      positional_used = true;
      continue;
    }
    std::string name = tok.substr(2);
    std::string value;
    bool has_value = false;
    if (const auto eq = name.find('='); eq != std::string::npos) {
      value = name.substr(eq + 1);
      name = name.substr(0, eq);
      has_value = true;
    } else if (i + 1 < tokens.size() && tokens[i + 1].rfind("--", 0) != 0) {
      value = tokens[++i];
      has_value = true;
    } else {
      value = "true";
    }
    if (name.empty()) throw ValidationError("empty option name in '" + tok + "'");
    if (is_global(name)) {
      if (!has_value) throw ValidationError("--" + name + " needs a value");
      set_global(globals, name, value);
      continue;
    }
    config.set(resolve_key(info, name), value);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo experiments for log-correlated Gaussian fields", "logcorr"};
  app.require_subcommand(1);

  Globals globals;
  app.add_option("--config", globals.config_path, "INI-style config file");
  app.add_option("--seed", globals.seed, "64-bit unsigned base seed");
  app.add_option("--workers", globals.workers, "worker threads (results do not depend on it)");
  app.add_option("--out", globals.out_dir, "output directory; tables go to stdout when omitted");
  app.add_option("--format", globals.format, "csv or json");

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, info] : command_table()) {
    auto* sub = app.add_subcommand(name, info.description);
    sub->prefix_command();
    subs[name] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    Config overrides;
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      ctx.command = name;
      const auto tokens = sub->remaining();
      if (std::find(tokens.begin(), tokens.end(), "--help") != tokens.end()) {
        out << sub->help();
        return kExitOk;
      }
      apply_overrides(command_table().at(name), tokens, globals, overrides);
    }
    if (globals.format != "csv" && globals.format != "json") {
      throw ValidationError("--format must be csv or json, got '" + globals.format + "'");
    }
    ctx.format = globals.format;
    if (!globals.config_path.empty()) {
      if (!std::filesystem::exists(globals.config_path)) {
        throw ValidationError("config file not found: " + globals.config_path);
      }
      ctx.config = Config::load(globals.config_path);
    }
    for (const auto& [key, value] : overrides.values()) ctx.config.set(key, value);
    if (!globals.seed.empty()) ctx.config.set("run.seed", globals.seed);
    if (!globals.workers.empty()) ctx.config.set("run.workers", globals.workers);
    ctx.seed = ctx.config.get_u64("run.seed", 1);
    const auto w = ctx.config.get_int("run.workers", 1);
    if (w < 1 || w > 4096) throw ValidationError("run.workers must be in [1, 4096]");
    ctx.workers = static_cast<unsigned>(w);
    if (!globals.out_dir.empty()) {
      std::filesystem::create_directories(globals.out_dir);
      ctx.out_dir = globals.out_dir;
    }
    return command_table().at(ctx.command).run(ctx);
  } catch (const CensoredResult& e) {
    err << "censored: " << e.what() << '\n';
    return kExitCensored;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace logcorr::cli
