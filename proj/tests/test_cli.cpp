#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "gazeattn/io.hpp"

namespace fs = std::filesystem;
using gazeattn::cli::cli_main;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gazeattn-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// A tiny generated dataset shared by the tests below.
const fs::path& dataset() {
  static const fs::path dir = [] {
    const fs::path d = scratch("data");
    const Run r = run({"gen-synthetic", "--seed", "0", "--classes", "3", "--samples", "40", "--grid", "8", "--out", d.string()});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> quick_bench(const fs::path& out) {
  return {"bench",   "--manifest", (dataset() / "manifest.json").string(), "--seed", "0", "--steps", "3", "--features",
          "4",       "--k",        "2",  "--fgsm-eps", "0.05", "--out", out.string()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("unknown flags and bad values exit 1") {
    CHECK(run({"bench", "--no-such-flag"}).code == 1);
    CHECK(run({"--bogus"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"gradcheck", "--jobs", "0"}).code == 1);
    CHECK(run({"eval-gaze"}).code == 1);  // no manifest
    CHECK(run({"eval-gaze", "--manifest", "/nonexistent/m.json"}).code == 1);
    CHECK(run({"train-toy", "--manifest", (dataset() / "manifest.json").string(), "--baseline", "nope", "--out",
               scratch("bad").string()})
              .code == 1);
  }

  TEST_CASE("help exits 0") {
    const Run r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("bench") != std::string::npos);
  }

  TEST_CASE("eval-gaze on a constant map reports 0.5") {
    const fs::path dir = scratch("const");
    std::ostringstream manifest;
    manifest << R"({"version":"gazeattn-manifest/1","settings":{"rows":4,"cols":4},"entries":[)";
    for (int i = 0; i < 3; ++i) {
      const std::string id = "c" + std::to_string(i);
      gazeattn::write_text_file(dir / (id + ".fix.csv"),
                                "# rows 4 cols 4\nimage_id,row,col\n" + id + "," + std::to_string(i) + ",1\n" + id + ",3," +
                                    std::to_string(i) + "\n");
      gazeattn::write_text_file(dir / (id + ".map.csv"), "0.5,0.5,0.5,0.5\n0.5,0.5,0.5,0.5\n0.5,0.5,0.5,0.5\n0.5,0.5,0.5,0.5\n");
      manifest << (i ? "," : "") << R"({"id":")" << id << R"(","fixation_path":")" << id << R"(.fix.csv","saliency_map_path":")"
               << id << R"(.map.csv"})";
    }
    manifest << "]}";
    gazeattn::write_text_file(dir / "manifest.json", manifest.str());
    const Run r = run({"eval-gaze", "--manifest", (dir / "manifest.json").string()});
    CHECK(r.code == 0);
    CHECK_MESSAGE(r.out.find("\nsaliency,0.5,") != std::string::npos, r.out);
  }

  TEST_CASE("gen-synthetic writes a loadable manifest") {
    CHECK(fs::exists(dataset() / "manifest.json"));
    CHECK(listing(dataset() / "images").size() == 40);
    const Run r = run({"eval-saliency", "--manifest", (dataset() / "manifest.json").string()});
    CHECK(r.code == 0);  // no maps yet: an empty table with the full header
    CHECK(r.out.find("map,F adaptive,F max,MAE,images") != std::string::npos);
  }

  TEST_CASE("train-toy writes a checkpoint and loss trace") {
    const fs::path out = scratch("train");
    const Run r = run({"train-toy", "--manifest", (dataset() / "manifest.json").string(), "--baseline", "supervised",
                       "--steps", "3", "--features", "4", "--out", out.string()});
    CHECK_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(out / "checkpoint-supervised.txt"));
    CHECK(fs::exists(out / "loss-trace-supervised.csv"));
  }

  TEST_CASE("bench emits the golden file set, byte-identical across runs") {
    const fs::path a = scratch("bench-a"), b = scratch("bench-b");
    const Run ra = run(quick_bench(a));
    REQUIRE_MESSAGE(ra.code == 0, ra.err);
    auto args = quick_bench(b);
    args.insert(args.begin() + 1, {"--jobs", "2"});
    const Run rb = run(args);
    REQUIRE_MESSAGE(rb.code == 0, rb.err);

    const auto files = listing(a);
    CHECK(files == listing(b));
    for (const auto& f : files) {
      if (f.size() > 4 && f.substr(f.size() - 4) == ".csv") {
        CHECK_MESSAGE(gazeattn::read_text_file(a / f) == gazeattn::read_text_file(b / f), f);
      }
    }

    std::ifstream golden(fs::path(GAZEATTN_GOLDEN_DIR) / "bench_seed0_files.txt");
    REQUIRE(golden.good());
    std::vector<std::string> expected;
    for (std::string line; std::getline(golden, line);)
      if (!line.empty()) expected.push_back(line);
    CHECK(files == expected);
  }

  TEST_CASE("eval-saliency and compare-attention on a hand-built manifest") {
    const fs::path dir = scratch("maps");
    std::ostringstream m;
    m << R"({"version":"gazeattn-manifest/1","settings":{"rows":4,"cols":4},"entries":[)";
    for (int i = 0; i < 6; ++i) {
      const std::string id = "m" + std::to_string(i);
      gazeattn::write_text_file(dir / (id + ".fix.csv"),
                                "# rows 4 cols 4\nimage_id,row,col\n" + id + ",1,1\n" + id + ",2," + std::to_string(i % 4) + "\n");
      std::vector<double> map(16, 0.1), mask(16, 0.0);
      map[5] = 0.9;
      map[static_cast<std::size_t>(8 + i % 4)] = 0.2 + 0.1 * i;
      mask[5] = mask[6] = 1.0;
      gazeattn::write_matrix(dir / (id + ".map.pgm"), gazeattn::GridView{4, 4, map}, gazeattn::MatrixFormat::pgm);
      gazeattn::write_matrix(dir / (id + ".mask.pgm"), gazeattn::GridView{4, 4, mask}, gazeattn::MatrixFormat::pgm);
      m << (i ? "," : "") << R"({"id":")" << id << R"(","fixation_path":")" << id << R"(.fix.csv","gt_mask_path":")" << id
        << R"(.mask.pgm","attention_map_paths":{"sigmoid":")" << id << R"(.map.pgm"},"task_scores":{"sigmoid":)" << 0.1 * i
        << R"(},"correct":{"sigmoid":)" << (i % 2 ? "true" : "false") << "}}";
    }
    m << "]}";
    gazeattn::write_text_file(dir / "manifest.json", m.str());
    const std::string manifest = (dir / "manifest.json").string();

    const Run sal = run({"eval-saliency", "--manifest", manifest});
    CHECK_MESSAGE(sal.code == 0, sal.err);
    CHECK(sal.out.find("\nsigmoid,") != std::string::npos);

    const fs::path out = scratch("compare-out");
    const Run cmp = run({"compare-attention", "--manifest", manifest, "--k", "2", "--format", "csv", "--out", out.string()});
    CHECK_MESSAGE(cmp.code == 0, cmp.err);
    CHECK(listing(out).size() == 4);
    CHECK(cmp.out.find("# Grouped correlation top-bottom vs-human") != std::string::npos);

    const Run none = run({"compare-attention", "--manifest", (dataset() / "manifest.json").string()});
    CHECK(none.code == 1);
  }

  TEST_CASE("gradcheck passes") {
    const Run r = run({"gradcheck", "--seed", "0", "--samples", "2"});
    CHECK_MESSAGE(r.code == 0, r.out);
    CHECK(r.out.find("(pass)") != std::string::npos);
  }
}
