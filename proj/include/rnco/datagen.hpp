#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rnco/env.hpp"
#include "rnco/oracles.hpp"
#include "rnco/rng.hpp"

namespace rnco {

// Vehicle capacity by problem size. The published sizes are pinned
// (Q_100=50, Q_200=70, Q_500=130, Q_1000=230); desk-scale sizes in [8, 20]
// default to 30; anything else must be passed explicitly.
int capacity_for(int n, int override_capacity);

// Prize from the depot distance: 1 + floor(99 * d / d_max), in [1, 100]. The
// ratio is formed first so the farthest customer divides to exactly 1.0 and
// always scores 100.
inline int op_prize(double depot_dist, double max_depot_dist) {
  return 1 + static_cast<int>(std::floor(99.0 * (depot_dist / max_depot_dist)));
}

constexpr double kOpDistanceLimit = 4.0;

Instance gen_instance(Problem kind, int n, int capacity, double distance_limit, Rng& rng);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

struct DatasetManifest {
  int version = 1;
  Problem kind = Problem::tsp;
  int n = 0;
  long long count = 0;
  std::uint64_t seed = 0;
  int capacity = 0;
  double distance_limit = 0.0;
  bool labeled = false;
  std::string checksum;
};

struct GenConfig {
  Problem kind = Problem::tsp;
  int n = 10;
  long long count = 0;
  std::uint64_t seed = 0;
  int capacity = 0;           // 0 = resolve from n
  double distance_limit = kOpDistanceLimit;
  bool labels = false;
  std::string out_dir;
};

// Writes instances.jsonl (+ trajectories.jsonl when labeled) and
// manifest.json under out_dir. Instance i is generated from substream
// (seed, i), so the dataset is reproducible and order-independent.
DatasetManifest gen_dataset(const GenConfig& cfg);

struct Dataset {
  DatasetManifest manifest;
  std::vector<std::shared_ptr<const Instance>> instances;
  std::vector<Trajectory> trajectories;  // aligned with instances when labeled
};

Dataset load_dataset(const std::string& dir);

// FNV-1a 64 over the dataset's data files, hex-encoded.
std::string dataset_checksum(const std::string& dir);

}  // namespace rnco
