#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "fsre/error.hpp"

namespace fsre::cli {

namespace {

using CommandFn = int (*)(const ExperimentConfig&, std::ostream&);

struct CommandInfo {
  const char* name;
  const char* help;
  CommandFn run;
};

constexpr CommandInfo kCommands[] = {
    {"synth", "write a synthetic schema, corpus and generation script", cmd_synth},
    {"sample", "draw K-shot train and validation splits", cmd_sample},
    {"icl", "run in-context learning for each prompt style and score it", cmd_icl},
    {"generate", "generate and validate new training instances per relation", cmd_generate},
    {"sweep", "train the probe on mixed data for each k and report F1", cmd_sweep},
    {"report", "score a predictions file against gold labels", cmd_report},
};

// "--a.b=v" and "a.b=v" both become "a.b=v".
std::optional<std::string> as_override(std::string arg) {
  if (arg.rfind("--", 0) == 0) arg.erase(0, 2);
  if (arg.find('=') == std::string::npos || arg.front() == '=') return std::nullopt;
  return arg;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::backend: return kExitBackend;
    case ErrorKind::data: return kExitData;
  }
  return kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot relation extraction experiments"};
  app.set_version_flag("--version", std::string(FSRE_VERSION));
  app.require_subcommand(1, 1);

  std::string config_file;
  std::string styles;
  std::string output_dir;
  app.add_option("-c,--config", config_file, "JSON config file");
  app.add_option("--styles", styles, "prompt styles: all, or a comma list of text, text+schema, instruct, instruct+schema");
  app.add_option("-o,--out", output_dir, "output directory (output_dir)");
  app.footer("Any config key can be overridden with --key=value or key=value, e.g. --icl.per_relation_demos=2.");

  std::map<const CLI::App*, CommandFn> dispatch;
  for (const auto& command : kCommands) {
    auto* sub = app.add_subcommand(command.name, command.help);
    sub->allow_extras();
    sub->fallthrough();
    dispatch[sub] = command.run;
  }
  app.allow_extras();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << FSRE_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  std::vector<std::string> overrides;
  std::vector<std::string> extras = app.remaining();
  for (auto& extra : chosen->remaining()) extras.push_back(extra);
  for (auto& extra : extras) {
    auto ov = as_override(extra);
    if (!ov) {
      err << "error: unexpected argument '" << extra << "'\n";
      return kExitConfig;
    }
    overrides.push_back(std::move(*ov));
  }
  if (!styles.empty()) overrides.push_back("icl.styles=" + styles);
  if (!output_dir.empty()) overrides.push_back("output_dir=" + output_dir);

  try {
    const auto cfg = load_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), overrides);
    return dispatch.at(chosen)(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace fsre::cli
