#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rnco/checkpoint.hpp"
#include "rnco/datagen.hpp"
#include "rnco/model.hpp"

using namespace rnco;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("rnco_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("capacity table matches the published sizes") {
  CHECK(capacity_for(100, 0) == 50);
  CHECK(capacity_for(200, 0) == 70);
  CHECK(capacity_for(500, 0) == 130);
  CHECK(capacity_for(1000, 0) == 230);
  CHECK(capacity_for(10, 0) == 30);
  CHECK(capacity_for(10, 44) == 44);
  CHECK_THROWS_AS(capacity_for(64, 0), ConfigError);
}

TEST_CASE("op prize formula at the boundaries") {
  CHECK(op_prize(1.0, 1.0) == 100);   // farthest customer
  CHECK(op_prize(0.5, 1.0) == 50);    // half the max distance: 1 + floor(49.5)
  CHECK(op_prize(0.0, 1.0) == 1);
}

TEST_CASE("generated instances respect the documented bounds") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto cv = gen_instance(Problem::cvrp, 10, 30, 0, rng);
    for (std::size_t i = 1; i < cv.demands.size(); ++i) {
      CHECK(cv.demands[i] >= 1);
      CHECK(cv.demands[i] <= 10);
    }
    for (const auto& p : cv.coords) {
      CHECK(p[0] >= 0.0);
      CHECK(p[0] < 1.0);
      CHECK(p[1] >= 0.0);
      CHECK(p[1] < 1.0);
    }
    auto op = gen_instance(Problem::op, 8, 0, kOpDistanceLimit, rng);
    int maxp = 0;
    for (std::size_t i = 1; i < op.prizes.size(); ++i) {
      CHECK(op.prizes[i] >= 1);
      CHECK(op.prizes[i] <= 100);
      maxp = std::max(maxp, op.prizes[i]);
    }
    CHECK(maxp == 100);  // the farthest customer always scores 100
    CHECK(op.distance_limit == 4.0);
  }
}

TEST_CASE("same seed and parameters reproduce byte-identical datasets") {
  TempDir a("gen_a"), b("gen_b");
  GenConfig cfg;
  cfg.kind = Problem::tsp;
  cfg.n = 8;
  cfg.count = 20;
  cfg.seed = 99;
  cfg.labels = true;
  cfg.out_dir = a.path.string();
  auto ma = gen_dataset(cfg);
  cfg.out_dir = b.path.string();
  auto mb = gen_dataset(cfg);
  CHECK(slurp(a.path / "instances.jsonl") == slurp(b.path / "instances.jsonl"));
  CHECK(slurp(a.path / "trajectories.jsonl") == slurp(b.path / "trajectories.jsonl"));
  CHECK(ma.checksum == mb.checksum);
  CHECK(dataset_checksum(a.path.string()) == ma.checksum);
}

TEST_CASE("labeled datasets replay cleanly and match the oracle objective") {
  TempDir dir("gen_lab");
  GenConfig cfg;
  cfg.kind = Problem::tsp;
  cfg.n = 8;
  cfg.count = 30;
  cfg.seed = 5;
  cfg.labels = true;
  cfg.out_dir = dir.path.string();
  gen_dataset(cfg);
  auto ds = load_dataset(dir.path.string());
  REQUIRE(ds.instances.size() == 30);
  REQUIRE(ds.trajectories.size() == 30);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    auto sol = replay(ds.instances[i], ds.trajectories[i].actions);
    CHECK(std::abs(sol.objective - ds.trajectories[i].objective) < 1e-9);
    CHECK(std::abs(sol.objective - exact_tsp_cycle(*ds.instances[i]).objective) < 1e-9);
  }
}

TEST_CASE("dataset round trip preserves every field") {
  TempDir dir("gen_rt");
  GenConfig cfg;
  cfg.kind = Problem::cvrp;
  cfg.n = 9;
  cfg.count = 12;
  cfg.seed = 31;
  cfg.labels = true;
  cfg.out_dir = dir.path.string();
  auto manifest = gen_dataset(cfg);
  CHECK(manifest.capacity == 30);
  auto ds = load_dataset(dir.path.string());
  CHECK(ds.manifest.kind == Problem::cvrp);
  CHECK(ds.manifest.count == 12);
  CHECK(ds.manifest.seed == 31);
  Rng rng = Rng::substream(31, 4);
  auto expect = gen_instance(Problem::cvrp, 9, 30, 0, rng);
  CHECK(ds.instances[4]->coords == expect.coords);
  CHECK(ds.instances[4]->demands == expect.demands);
  CHECK(ds.instances[4]->capacity == expect.capacity);
}

TEST_CASE("loading without a manifest fails") {
  TempDir dir("gen_nomanifest");
  CHECK_THROWS_AS(load_dataset(dir.path.string()), IoError);
}

TEST_CASE("malformed data lines report the line number") {
  TempDir dir("gen_badline");
  GenConfig cfg;
  cfg.kind = Problem::tsp;
  cfg.n = 8;
  cfg.count = 3;
  cfg.seed = 1;
  cfg.out_dir = dir.path.string();
  gen_dataset(cfg);
  std::ofstream(dir.path / "instances.jsonl", std::ios::app) << "{not json\n";
  try {
    load_dataset(dir.path.string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("instances.jsonl:4") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip is bitwise and keeps the header") {
  TempDir dir("ckpt");
  ModelConfig mc;
  mc.problem = Problem::tsp;
  mc.l_e = 1;
  mc.d_e = 8;
  mc.d_ff_e = 16;
  mc.heads_e = 2;
  mc.l_u = 1;
  mc.d_u = 4;
  mc.d_ff_u = 8;
  mc.heads_u = 2;
  auto params = init_params<float>(mc, 77);
  nlohmann::json header = {{"model", model_config_to_json(mc)}, {"train_k", 5}};
  save_checkpoint(dir.path.string(), params, header);
  auto [loaded, header2] = load_checkpoint(dir.path.string());
  CHECK(header2 == header);
  REQUIRE(loaded.names() == params.names());
  for (const auto& name : params.names()) {
    CHECK(*loaded.at(name).data == *params.at(name).data);
    CHECK(loaded.at(name).shape == params.at(name).shape);
  }
  auto mc2 = model_config_from_json(header2.at("model"));
  CHECK(mc2.d_e == 8);
  CHECK(mc2.l_u == 1);
}
