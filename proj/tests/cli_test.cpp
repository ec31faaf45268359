#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <apmp/io.hpp>

#include "fixtures.hpp"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string temp_path(const std::string& stem) {
  return "/tmp/apmp_cli_test_" + std::to_string(getpid()) + "_" + stem;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Runs the installed CLI binary with the given arguments, capturing both
// streams and the exit code.
CliResult run_cli(const std::string& args) {
  const std::string err_path = temp_path("stderr");
  const std::string cmd =
      std::string(APMP_CLI_PATH) + " " + args + " 2>" + err_path;
  CliResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.err = slurp(err_path);
  std::remove(err_path.c_str());
  return res;
}

const std::string kChainJson =
    "'{\"num_vars\": 2, \"unaries\": [[0,3],[3,0]], \"edges\": [[0,1,2,2]]}'";

}  // namespace

TEST_CASE("solve agrees across methods on the chain") {
  for (const std::string method : {"apmp", "maxflow", "bruteforce", "strictmp"}) {
    const CliResult res = run_cli("solve " + kChainJson + " --method " + method);
    REQUIRE_MESSAGE(res.exit_code == 0, res.err);
    const nlohmann::json doc = nlohmann::json::parse(res.out);
    CHECK(doc["energy"] == 2.0);
    CHECK(doc["assignment"] == nlohmann::json::array({0, 1}));
    CHECK(doc["method"] == method);
    CHECK(doc["converged"] == true);
  }
}

TEST_CASE("solve reads files and handles the loopy fixture") {
  const std::string path = temp_path("counterexample.json");
  spit(path, apmp::save_energy_json(fixtures::make_counterexample()));

  const CliResult apmp_res = run_cli("solve " + path + " --method apmp");
  REQUIRE_MESSAGE(apmp_res.exit_code == 0, apmp_res.err);
  const nlohmann::json doc = nlohmann::json::parse(apmp_res.out);
  CHECK(doc["assignment"] == nlohmann::json::array({1, 1, 1, 1}));
  CHECK(doc["energy"] == 2.0);

  const CliResult strict_res =
      run_cli("solve " + path + " --method apmp --phase2-mode strict");
  CHECK(nlohmann::json::parse(strict_res.out)["assignment"] ==
        doc["assignment"]);

  // Plain parallel rounds are reported as-is, whether or not they match.
  const CliResult mp_res = run_cli("solve " + path + " --method strictmp");
  CHECK(mp_res.exit_code == 0);
  const nlohmann::json mp_doc = nlohmann::json::parse(mp_res.out);
  CHECK(mp_doc["energy"].is_number());

  std::remove(path.c_str());
}

TEST_CASE("solve renders text output on request") {
  const CliResult res = run_cli("solve " + kChainJson + " --format text");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("energy: 2") != std::string::npos);
  CHECK(res.out.find("assignment: 0 1") != std::string::npos);
}

TEST_CASE("solve writes a DIMACS side file") {
  const std::string path = temp_path("network.dimacs");
  const CliResult res =
      run_cli("solve " + kChainJson + " --dimacs-out " + path);
  CHECK(res.exit_code == 0);
  const std::string dimacs = slurp(path);
  CHECK(dimacs.rfind("p max 4 4\n", 0) == 0);
  std::remove(path.c_str());
}

TEST_CASE("input failures exit 3 with a machine-readable reason") {
  const CliResult garbage = run_cli("solve '{broken'");
  CHECK(garbage.exit_code == 3);
  CHECK(nlohmann::json::parse(garbage.err)["error"] == "Malformed");

  const CliResult missing = run_cli("solve /tmp/apmp_no_such_file.json");
  CHECK(missing.exit_code == 3);

  const CliResult bad_method = run_cli("solve " + kChainJson + " --method qpbo");
  CHECK(bad_method.exit_code == 3);

  apmp::Energy big;
  big.num_vars = 30;
  big.unaries.assign(30, {0.0, 0.0});
  const std::string path = temp_path("big.json");
  spit(path, apmp::save_energy_json(big));
  const CliResult capped = run_cli("solve " + path + " --method bruteforce");
  CHECK(capped.exit_code == 3);
  CHECK(nlohmann::json::parse(capped.err)["error"] == "TooLarge");
  std::remove(path.c_str());

  const std::string off_form =
      "'{\"num_vars\": 1, \"unaries\": [[2,5]]}'";
  const CliResult rejected = run_cli("solve " + off_form);
  CHECK(rejected.exit_code == 3);
  CHECK(nlohmann::json::parse(rejected.err)["error"] == "NonCanonical");
  const CliResult converted = run_cli("solve " + off_form + " --canonicalize");
  CHECK(converted.exit_code == 0);
  CHECK(nlohmann::json::parse(converted.out)["energy"] == 2.0);
}

TEST_CASE("generate is deterministic and feeds solve") {
  const CliResult a = run_cli("generate --n 6 --density 0.5 --seed 1");
  const CliResult b = run_cli("generate --n 6 --density 0.5 --seed 1");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);

  const std::string path = temp_path("generated.json");
  spit(path, a.out);
  const CliResult solved = run_cli("solve " + path + " --method maxflow");
  CHECK(solved.exit_code == 0);
  std::remove(path.c_str());

  const CliResult rejected = run_cli("generate --n 6 --density 0");
  CHECK(rejected.exit_code == 3);
}

TEST_CASE("verify passes on generated instances and explicit fixtures") {
  const CliResult random = run_cli("verify --instances 30 --seed 5");
  REQUIRE_MESSAGE(random.exit_code == 0, random.err);
  const nlohmann::json doc = nlohmann::json::parse(random.out);
  CHECK(doc["instances"] == 30);
  CHECK(doc["mismatches"].empty());
  CHECK(doc["iterations_total"].get<int>() > 0);

  const CliResult fixture = run_cli("verify " + kChainJson);
  CHECK(fixture.exit_code == 0);
}

TEST_CASE("verify checks a saved message state") {
  const apmp::Energy cx = fixtures::make_counterexample();
  const std::string energy_path = temp_path("cx.json");
  spit(energy_path, apmp::save_energy_json(cx));

  const apmp::MessageState good = fixtures::counterexample_fixed_point(cx);
  const std::string good_path = temp_path("state_good.json");
  spit(good_path, apmp::save_messages_json(cx, good));
  const CliResult ok =
      run_cli("verify " + energy_path + " --state " + good_path);
  REQUIRE_MESSAGE(ok.exit_code == 0, (ok.out + ok.err));
  CHECK(nlohmann::json::parse(ok.out)["mismatches"].empty());

  apmp::MessageState bad = good;
  bad.fac_to_var[0][1] = {4.0, 0.0};
  const std::string bad_path = temp_path("state_bad.json");
  spit(bad_path, apmp::save_messages_json(cx, bad));
  const CliResult found =
      run_cli("verify " + energy_path + " --state " + bad_path);
  CHECK(found.exit_code == 2);
  const nlohmann::json report = nlohmann::json::parse(found.out);
  REQUIRE_FALSE(report["mismatches"].empty());
  CHECK(report["mismatches"][0]["field"] == "fixed_point");

  std::remove(energy_path.c_str());
  std::remove(good_path.c_str());
  std::remove(bad_path.c_str());
}

TEST_CASE("trace prints one record per chain update plus a summary") {
  const CliResult chain = run_cli("trace " + kChainJson);
  REQUIRE(chain.exit_code == 0);
  std::vector<nlohmann::json> lines;
  std::size_t start = 0;
  while (start < chain.out.size()) {
    const std::size_t end = chain.out.find('\n', start);
    if (end == std::string::npos) break;
    if (end > start) {
      lines.push_back(nlohmann::json::parse(chain.out.substr(start, end - start)));
    }
    start = end + 1;
  }
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["iter"] == 0);
  CHECK(lines[0]["f"] == 2.0);
  CHECK(lines[1]["assignment"] == nlohmann::json::array({0, 1}));
  CHECK(lines[1]["energy"] == 2.0);

  const std::string path = temp_path("cx_trace.json");
  spit(path, apmp::save_energy_json(fixtures::make_counterexample()));
  const CliResult cx = run_cli("trace " + path);
  CHECK(cx.exit_code == 0);
  CHECK(std::count(cx.out.begin(), cx.out.end(), '\n') == 3);
  std::remove(path.c_str());

  const CliResult empty =
      run_cli("trace '{\"num_vars\": 1, \"unaries\": [[0,0]]}'");
  CHECK(empty.exit_code == 0);
  CHECK(std::count(empty.out.begin(), empty.out.end(), '\n') == 1);
}
