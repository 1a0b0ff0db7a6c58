#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>
#include <string>

#include "carnot/json_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env.empty() ? std::string(CARNOT_CLI_PATH) + " " + args
                                : env + " " + CARNOT_CLI_PATH + " " + args;
  cmd += " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path temp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "carnot-cli-tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("refute produces a verifiable family file on the step-3 group") {
  fs::path fam = temp_file("fam20.json");
  CliResult r = run_cli("refute --group free_nilpotent_2_3 --gauge euclidean --N 20 --out " +
                        fam.string());
  REQUIRE(r.exit_code == 0);
  carnot::json rep = carnot::parse_json(r.out);
  CHECK(rep["verdict"] == "refuted");
  CHECK(rep["family_size"] == 20);
  CHECK(rep["group_verification"]["verdict"] == "pass");

  CliResult v = run_cli("verify " + fam.string());
  CHECK(v.exit_code == 0);
  carnot::json vrep = carnot::parse_json(v.out);
  CHECK(vrep["verdict"] == "pass");
  CHECK(vrep["certified"] == true);
}

TEST_CASE("refute exits 2 when the exponent gate blocks the construction") {
  CliResult r = run_cli("refute --group heisenberg1 --gauge euclidean");
  CHECK(r.exit_code == 2);
  carnot::json rep = carnot::parse_json(r.out);
  CHECK(rep["verdict"] == "inapplicable");
  CHECK(rep["gamma_star"] == 2.0);
  CHECK(rep["step"] == 2);
  std::string notes = rep["notes"].dump();
  CHECK(notes.find("step") != std::string::npos);
}

TEST_CASE("refute exits 1 on unknown inputs") {
  CHECK(run_cli("refute --group nosuch --gauge euclidean").exit_code == 1);
  CHECK(run_cli("refute --group heisenberg1 --gauge nosuch").exit_code == 1);
  CHECK(run_cli("refute --group heisenberg1").exit_code == 1);  // no gauge source
  CHECK(run_cli("refute --group heisenberg1 --group-json x.json --gauge euclidean").exit_code ==
        1);  // two group sources
  CHECK(run_cli("bogus-subcommand").exit_code == 1);
}

TEST_CASE("verify flags a perturbed family with exit 3 and failing indices") {
  fs::path fam = temp_file("fam6.json");
  REQUIRE(run_cli("refute --group free_nilpotent_2_3 --gauge euclidean --N 6 --out " +
                  fam.string())
              .exit_code == 0);

  carnot::json doc = carnot::parse_json(slurp(fam));
  // inflate one radius tenfold: the center of the bigger ball now sits
  // inside the inflated one
  carnot::XReal radius = carnot::xreal_from_json(doc["balls"][2]["radius"]);
  doc["balls"][2]["radius"] = carnot::xreal_to_json(radius * carnot::XReal(10.0));
  fs::path bad = temp_file("fam6_bad.json");
  std::ofstream(bad) << doc.dump(2);

  CliResult v = run_cli("verify " + bad.string());
  CHECK(v.exit_code == 3);
  carnot::json rep = carnot::parse_json(v.out);
  CHECK(rep["verdict"] == "fail");
  CHECK(rep["certified"] == false);
  bool found = false;
  for (const auto& p : rep["failing_pairs"]) found = found || p[1] == 2;
  CHECK(found);
}

TEST_CASE("verify exits 1 on malformed input") {
  fs::path bad = temp_file("truncated.json");
  std::ofstream(bad) << "{\"space\": \"group\", \"witness\": [";
  CHECK(run_cli("verify " + bad.string()).exit_code == 1);
  CHECK(run_cli("verify /nonexistent/fam.json").exit_code == 1);
}

TEST_CASE("dist prints 15 significant digits") {
  CliResult r = run_cli("dist --group heisenberg1 --gauge euclidean -p 0,0,0 -q 1,0,0");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "1.00000000000000\n");

  CliResult same = run_cli("dist --group heisenberg1 --gauge euclidean -p 1,2,3 -q 1,2,3");
  CHECK(same.out == "0.00000000000000\n");

  CliResult plane = run_cli("dist --plane-a 2 --plane-b 2 --plane-s 3 -p 0,0 -q 1,1");
  CHECK(plane.exit_code == 0);
  CHECK(plane.out.rfind("1.2106077944", 0) == 0);

  CHECK(run_cli("dist --group heisenberg1 --gauge euclidean -p 0,0 -q 1,0,0").exit_code == 1);
}

TEST_CASE("sphere output is byte-identical for a fixed seed") {
  CliResult a = run_cli("sphere --group heisenberg1 --gauge euclidean --count 1000 --seed 7");
  CliResult b = run_cli("sphere --group heisenberg1 --gauge euclidean --count 1000 --seed 7");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("x1,x2,x3\n", 0) == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 1001);

  CliResult other = run_cli("sphere --group heisenberg1 --gauge euclidean --count 1000 --seed 8");
  CHECK(other.out != a.out);

  CliResult empty = run_cli("sphere --group heisenberg1 --gauge euclidean --count 0 --seed 7");
  CHECK(empty.exit_code == 0);
  CHECK(empty.out == "x1,x2,x3\n");
}

TEST_CASE("seed falls back to the environment variable") {
  CliResult flagged = run_cli("sphere --group heisenberg1 --gauge euclidean --count 5 --seed 99");
  CliResult env = run_cli("sphere --group heisenberg1 --gauge euclidean --count 5",
                          "CARNOT_GAUGE_SEED=99");
  CHECK(env.out == flagged.out);
  CHECK(run_cli("sphere --group heisenberg1 --gauge euclidean --count 5",
                "CARNOT_GAUGE_SEED=banana")
            .exit_code == 1);
}

TEST_CASE("quotient command reports sampled submetry violations") {
  CliResult r =
      run_cli("quotient --group free_nilpotent_2_3 --gauge euclidean --samples 1000 --seed 7");
  REQUIRE(r.exit_code == 0);
  carnot::json rep = carnot::parse_json(r.out);
  CHECK(rep["quotient_spec"]["quotient"]["step"] == 2);
  CHECK(rep["quotient_validation"]["verdict"] == "pass");
  CHECK(rep["submetry_report"]["samples"] == 1000);
  CHECK(rep["submetry_report"]["max_subset_violation"].get<double>() <= 1e-9);
  CHECK(rep["submetry_report"]["max_superset_violation"].get<double>() <= 1e-9);

  CHECK(run_cli("quotient --group heisenberg1 --gauge euclidean --samples 10").exit_code == 1);
}

TEST_CASE("inline gauge flags and custom group files work end to end") {
  fs::path gpath = temp_file("custom_group.json");
  std::ofstream(gpath) << carnot::group_to_json(carnot::free_nilpotent_2_3()).dump();
  CliResult r = run_cli("refute --group-json " + gpath.string() +
                        " --gauge-form coordinate --gauge-c 1 1 1 1 1 "
                        "--gauge-gamma 2.5 2 2 2 2 --N 4");
  CHECK(r.exit_code == 0);
  carnot::json rep = carnot::parse_json(r.out);
  CHECK(rep["witness_index"] == 2);
  CHECK(rep["model"]["a"] == 2.0);
}

TEST_CASE("validate subcommand reports structural checks") {
  CliResult r = run_cli("validate --group free_nilpotent_2_3");
  CHECK(r.exit_code == 0);
  carnot::json rep = carnot::parse_json(r.out);
  CHECK(rep["verdict"] == "pass");
}

TEST_CASE("refute reports are byte-identical across runs and can export CSV") {
  fs::path csv = temp_file("fam.csv");
  std::string args = "refute --group free_nilpotent_2_3 --gauge euclidean --N 8 --csv " +
                     csv.string();
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);

  std::string text = slurp(csv);
  CHECK(text.rfind("center_1,center_2,center_3,center_4,center_5,radius\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
}
