#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(MODREV_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (auto n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
  int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string data(const std::string& name) { return support::data_path(name); }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("modrev_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage snapshot") {
    auto r = run("--help");
    CHECK(r.status == 0);
    CHECK(r.out == support::slurp(std::string(MODREV_SNAPSHOTS) + "/usage.txt"));
  }

  TEST_CASE("validate") {
    auto ok = run("validate " + data("gifting.mlts") + " " + data("gifting.req") + " " +
                  data("gifting.lint"));
    CHECK(ok.status == 0);
    auto dir = scratch("validate");
    std::ofstream(dir / "bad.mlts") << "system X\nmodule a:\n  forward go\n  forward again\n";
    auto bad = run("validate " + (dir / "bad.mlts").string());
    CHECK(bad.status == 1);
    CHECK(bad.out.find("bad.mlts:2:1: module 'a' has more than one forward action") !=
          std::string::npos);
    std::ofstream(dir / "bad.req") << "req R kind=security weight=2: G(a -> )\n";
    auto req = run("validate " + (dir / "bad.req").string());
    CHECK(req.status == 1);
    CHECK(req.out.find("bad.req:1:38:") != std::string::npos);
  }

  TEST_CASE("table1 assert") {
    auto r = run("table1 --n-range 4..9 --assert-paper");
    CHECK(r.status == 0);
    CHECK(r.out.find("9,all,24309,4862") != std::string::npos);
    CHECK(run("table1 --n-range 1..3").status == 1);
  }

  TEST_CASE("enumerate") {
    auto r = run("enumerate --modules 5 --count");
    CHECK(r.status == 0);
    CHECK(r.out == "# 120 revisions\n");
  }

  TEST_CASE("check prints counterexamples") {
    auto r = run("check " + data("gifting.mlts") + " " + data("gifting.req"));
    CHECK(r.status == 0);
    CHECK(r.out.find("violated:") != std::string::npos);
    auto s = run("check " + data("gifting.mlts") + " " + data("gifting.req") +
                 " --permutation 2,1,4,6,3,7,5");
    CHECK(s.out.find("violated") == std::string::npos);
  }

  TEST_CASE("search, degrade and report") {
    auto dir = scratch("search");
    auto r = run("search " + data("gifting.mlts") + " " + data("gifting.req") + " --out " +
                 dir.string() + " --no-timing");
    CHECK(r.status == 0);
    CHECK(r.out.find("46 eligible of 5040 revisions") != std::string::npos);
    for (auto f : {"verdicts.csv", "selection.json", "manifest.json", "run.conf"}) {
      CHECK(fs::exists(dir / f));
    }
    auto manifest = nlohmann::json::parse(support::slurp((dir / "manifest.json").string()));
    CHECK(manifest["inputs"].size() == 2);
    CHECK_FALSE(manifest.contains("timing_ms"));

    // The written config reproduces the run.
    auto again = scratch("search_again");
    auto rerun = run("search " + data("gifting.mlts") + " " + data("gifting.req") + " --config " +
                     (dir / "run.conf").string() + " --out " + again.string());
    CHECK(rerun.status == 0);
    CHECK(support::slurp((again / "verdicts.csv").string()) ==
          support::slurp((dir / "verdicts.csv").string()));

    auto verdicts = (dir / "verdicts.csv").string();
    auto d = run("degrade " + verdicts + " " + data("gifting.req") + " --threshold 16");
    CHECK(d.status == 0);
    auto doc = nlohmann::json::parse(d.out.substr(d.out.find('{')));
    CHECK(doc["count"] == 96);

    auto rep = run("report " + data("gifting.mlts") + " " + verdicts + " " + data("gifting.req") +
                   " --lints " + data("gifting.lint"));
    CHECK(rep.status == 0);
    CHECK(rep.out.find("pay-after-logout") != std::string::npos);

    // Editing the verdict file after the run is detected.
    std::ofstream(verdicts, std::ios::app) << "\n";
    CHECK(run("degrade " + verdicts + " " + data("gifting.req")).status == 1);
  }

  TEST_CASE("unverified runs need explicit consent") {
    auto dir = scratch("noverify");
    auto base = "search " + data("gifting.mlts") + " " + data("gifting.req") + " --no-verify --out " +
                dir.string();
    auto r = run(base);
    CHECK(r.status == 1);
    CHECK(r.out.find("--allow-predicted") != std::string::npos);
    CHECK(run(base + " --allow-predicted").status == 0);
  }

  TEST_CASE("nothing found exits 2") {
    auto dir = scratch("none");
    auto r = run("search " + data("gifting.mlts") + " " + data("gifting_sr2_printed.req") +
                 " --mode oasis --out " + dir.string());
    CHECK(r.status == 2);
  }

  TEST_CASE("bad flags and config keys exit 1") {
    CHECK(run("search " + data("gifting.mlts") + " " + data("gifting.req") + " --tau 2").status == 1);
    auto dir = scratch("conf");
    std::ofstream(dir / "bad.conf") << "bogus=1\n";
    CHECK(run("search " + data("gifting.mlts") + " " + data("gifting.req") + " --config " +
              (dir / "bad.conf").string())
              .status == 1);
    CHECK(run("frobnicate").status == 1);
  }
}
