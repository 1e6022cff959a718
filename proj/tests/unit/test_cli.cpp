#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cip/dataset.hpp"
#include "cli.hpp"
#include "test_support.hpp"

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cip::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth, detect, eval, features") {
    cip::testing::TempDir d("cli");
    const std::string data = (d / "data").string(), dets = (d / "dets.json").string();
    REQUIRE(cli({"synth", "--preset", "tiny", "--seed", "4", "--out", data}).code == 0);
    CHECK(std::filesystem::exists(d / "data" / "scene.json"));

    REQUIRE(cli({"detect", "--data", data, "--out", dets, "--window-length", "10", "--window-stride", "5"}).code == 0);
    const std::string first = cip::testing::slurp(dets);
    REQUIRE(cli({"detect", "--data", data, "--out", dets, "--window-length", "10", "--window-stride", "5",
                 "--threads", "2"})
                .code == 0);
    CHECK(cip::testing::slurp(dets) == first);

    const Run ev = cli({"eval", "--data", data, "--detections", dets, "--exclude-undetectable"});
    CHECK(ev.code == 0);
    CHECK(ev.out.find("all") != std::string::npos);
    const auto report = nlohmann::json::parse(cip::testing::slurp(d / "dets.eval.json"));
    CHECK(report.contains("before"));
    CHECK(report["after"]["overall"]["f_score"].get<double>() >= report["before"]["overall"]["f_score"].get<double>());

    const Run ft = cli({"features", "--data", data, "--video", "0", "--frame", "3"});
    CHECK(ft.code == 0);
    const auto fj = nlohmann::json::parse(ft.out);
    REQUIRE(!fj["candidates"].empty());
    CHECK(fj["candidates"][0]["hof"].size() == 75);
    CHECK(fj["candidates"][0]["mag"].size() == 60);
  }

  TEST_CASE("eval names the first uncovered frame") {
    cip::testing::TempDir d("cli_cov");
    const std::string data = (d / "data").string();
    REQUIRE(cli({"synth", "--preset", "tiny", "--out", data}).code == 0);
    std::vector<cip::Detection> dets;
    for (int v = 0; v < 2; ++v)
      for (int f = 0; f < 30; ++f)
        if (!(v == 1 && f == 7)) dets.push_back({v, f, std::nullopt, std::nullopt, 0.0});
    cip::write_detections(dets, d / "partial.json");
    const Run r = cli({"eval", "--data", data, "--detections", (d / "partial.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("(video 1, frame 7)") != std::string::npos);
  }

  TEST_CASE("solve a serialized problem") {
    cip::testing::TempDir d("cli_solve");
    cip::testing::spit(d / "p.json", R"({"window_length": 2, "num_videos": 1, "has_idle": false,
      "state_counts": [2, 2], "edges": [{"a": 0, "b": 1, "kind": "intra", "costs": [[1, 0], [5, 2]]}]})");
    const Run r = cli({"solve", "--problem", (d / "p.json").string(), "--out", (d / "r.json").string()});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(cip::testing::slurp(d / "r.json"));
    CHECK(j["states"] == nlohmann::json::array({0, 1}));
    CHECK(j["energy"].get<double>() == 0.0);
  }

  TEST_CASE("exit codes") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"detect", "--bogus"}).code == 1);
    CHECK(cli({"detect", "--data", "/nonexistent/dir"}).code == 2);
    CHECK(cli({"synth", "--preset", "nope", "--out", "/tmp/x"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
  }
}
