// Command-line front end: construct / verify / selfcheck over JSON scenario
// configs. Exit codes: 0 success (and, for verify, every verdict true),
// 1 usage or config error, 2 a physics verdict came back false,
// 3 support/boundary violation, 4 selfcheck or output failure.

#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>

#include "nonspread/scenario.hpp"
#include "nonspread/selfcheck.hpp"
#include "nonspread/version.hpp"

namespace {

void print_usage(std::FILE* out) {
  std::fprintf(out,
               "usage: nonspread <command> [options]\n"
               "\n"
               "commands:\n"
               "  construct --config <path> --out <dir>   build shape, phase and "
               "consistency tables\n"
               "  verify    --config <path> --out <dir>   construct, propagate and "
               "score invariance\n"
               "  selfcheck                               run the built-in sanity "
               "suite\n"
               "  --version                               print the version\n");
}

struct CmdArgs {
  std::string config;
  std::string out;
};

bool parse_cmd_args(int argc, char** argv, CmdArgs* args) {
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      args->config = argv[++i];
    } else if (a == "--out" && i + 1 < argc) {
      args->out = argv[++i];
    } else {
      std::fprintf(stderr, "error: unexpected argument '%s'\n", a.c_str());
      return false;
    }
  }
  if (args->config.empty() || args->out.empty()) {
    std::fprintf(stderr, "error: --config and --out are both required\n");
    return false;
  }
  return true;
}

int run_scenario_command(const std::string& command, const CmdArgs& args) {
  try {
    const nonspread::ScenarioConfig cfg = nonspread::load_scenario(args.config);
    return command == "construct" ? nonspread::io::run_construct(cfg, args.out)
                                  : nonspread::io::run_verify(cfg, args.out);
  } catch (const nonspread::SupportEscape& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const nonspread::DirichletViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const nonspread::WriteFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const nonspread::Error& e) {
    // Remaining library errors trace back to the config requesting something
    // impossible (bad schema, non-confining eigensolve, unsupported pairing).
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(stderr);
    return 1;
  }
  const std::string command = argv[1];
  if (command == "--version" || command == "version") {
    std::printf("nonspread %s\n", nonspread::kVersion);
    return 0;
  }
  if (command == "--help" || command == "-h" || command == "help") {
    print_usage(stdout);
    return 0;
  }
  if (command == "selfcheck") {
    if (argc != 2) {
      std::fprintf(stderr, "error: selfcheck takes no arguments\n");
      return 1;
    }
    return nonspread::run_selfcheck();
  }
  if (command == "construct" || command == "verify") {
    CmdArgs args;
    if (!parse_cmd_args(argc, argv, &args)) return 1;
    return run_scenario_command(command, args);
  }
  std::fprintf(stderr, "error: unknown command '%s'\n", command.c_str());
  print_usage(stderr);
  return 1;
}
