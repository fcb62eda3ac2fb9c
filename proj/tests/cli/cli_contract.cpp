// Contract checks for the command-line surface: help availability, strict
// flag handling, and exit codes.  Takes the CLI path and a scratch directory.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;
std::filesystem::path g_scratch;
int g_failures = 0;

int run(const std::string& args) {
  const std::string cmd =
      g_cli + " " + args + " > " + (g_scratch / "out.txt").string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string output() {
  std::ifstream in(g_scratch / "out.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void expect(bool ok, const std::string& what) {
  if (!ok) {
    std::printf("[FAIL] %s\n", what.c_str());
    ++g_failures;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: cli_contract <cli-path> <scratch-dir>\n");
    return 2;
  }
  g_cli = argv[1];
  g_scratch = argv[2];
  std::filesystem::create_directories(g_scratch);

  {
    std::ofstream spec(g_scratch / "free.json");
    spec << R"({"kind":"builtin","name":"free_particle","params":{"mass":1.0},"dimension":1})";
  }

  const std::vector<std::string> subcommands = {
      "catalog",      "action",       "flow",
      "hj-check",     "compose",      "check-commute",
      "discrete-map", "check-commute-discrete", "poisson"};
  for (const std::string& sub : subcommands) {
    expect(run(sub + " --help") == 0, sub + " --help should exit 0");
    const std::string help = output();
    expect(help.find("--out") != std::string::npos || sub == "poisson" || sub == "catalog" ||
               help.find("Options") != std::string::npos,
           sub + " --help should list its flags");
    expect(run(sub + " --no-such-flag") == 3, sub + " must reject unknown flags with exit 3");
  }

  expect(run("--help") == 0, "top-level --help should exit 0");
  expect(run("--version") == 0, "--version should exit 0");
  expect(run("definitely-not-a-subcommand") == 3, "unknown subcommand must exit 3");
  expect(run("") == 3, "missing subcommand must exit 3");

  // spec/file problems are usage errors
  expect(run("action --system " + (g_scratch / "nope.json").string() +
             " --from 0 --to 1 --time 1") == 3,
         "missing spec file must exit 3");
  {
    std::ofstream bad(g_scratch / "bad.json");
    bad << R"({"name":"free_particle","wrong_field":1})";
  }
  expect(run("action --system " + (g_scratch / "bad.json").string() +
             " --from 0 --to 1 --time 1") == 3,
         "unknown spec field must exit 3");

  // solver-side refusals exit 4
  {
    std::ofstream spec(g_scratch / "harm.json");
    spec << R"({"kind":"builtin","name":"harmonic","dimension":1})";
  }
  expect(run("action --system " + (g_scratch / "harm.json").string() +
             " --from 0 --to 1 --time 3.0") == 4,
         "time-horizon refusal must exit 4");

  expect(run("action --system " + (g_scratch / "free.json").string() +
             " --from 0 --to 1 --time 1") == 0,
         "straightforward action run must exit 0");

  if (g_failures == 0) std::printf("cli contract: all checks passed\n");
  return g_failures;
}
