#include <array>
#include <cstdio>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string command = env + " '" RESIL_CLI_PATH "' " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer{};
  std::size_t got = 0;
  while ((got = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.out.append(buffer.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

}  // namespace

TEST_CASE("exit status 0 writes a passing report") {
  const auto r = run("attack --baseline majority:3 --q 1");
  CHECK(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "pass");
  CHECK(j["report_version"] == 1);
  CHECK(j["point"] == 0.5);
  CHECK(j["details"]["rows"][0]["exact"] == "1/2");
}

TEST_CASE("exit status 2 still writes the report") {
  const std::string gen = "/tmp/resil-test-cli-" + std::to_string(::getpid()) + ".gen";
  REQUIRE(run("--out " + gen + " gen build-rs --v 7 --ell 2 --w 4").status == 0);
  const auto audit = run("audit design --gen " + gen + " --min-d 3");
  CHECK(audit.status == 2);
  const auto j = nlohmann::json::parse(audit.out);
  CHECK(j["status"] == "violation");
  CHECK(j["point"] == 2.0);
  std::remove(gen.c_str());
}

TEST_CASE("exit status 1 emits no report") {
  for (const char* args : {"attack --baseline majority:3 --q 9", "balance --n 4 --mode exact-dyadic --second or",
                           "gen build-identity --v 3 --w 2", "audit design --gen /nonexistent/file.gen",
                           "attack --baseline majority:3 --sigma 0.5", "--no-such-flag"}) {
    CAPTURE(args);
    const auto r = run(args);
    CHECK(r.status == 1);
    CHECK(r.out.empty());
  }
}

TEST_CASE("budget environment variables are read and flags override them") {
  const auto env = run("attack --baseline tribes:10:3 --q 2", "RESIL_EXACT_BITS=4");
  REQUIRE(env.status == 0);
  const auto j = nlohmann::json::parse(env.out);
  CHECK(j["budget"]["exact_bits"] == 4);
  CHECK(j["details"]["rows"][0]["mode"] == "monte-carlo");
  const auto flag = run("--exact-bits 30 attack --baseline tribes:10:3 --q 2", "RESIL_EXACT_BITS=4");
  REQUIRE(flag.status == 0);
  CHECK(nlohmann::json::parse(flag.out)["details"]["rows"][0]["mode"] == "exact");
  CHECK(run("attack --baseline majority:3", "RESIL_SAMPLES=lots").status == 1);
}
