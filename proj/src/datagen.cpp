#include "rnco/datagen.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;

namespace rnco {

int capacity_for(int n, int override_capacity) {
  if (override_capacity > 0) return override_capacity;
  switch (n) {
    case 100: return 50;
    case 200: return 70;
    case 500: return 130;
    case 1000: return 230;
    default: break;
  }
  if (n >= 8 && n <= 20) return 30;
  throw ConfigError("no default vehicle capacity for n=" + std::to_string(n) +
                    "; pass --capacity");
}

Instance gen_instance(Problem kind, int n, int capacity, double distance_limit, Rng& rng) {
  if (n < 2) throw ConfigError("gen_instance: need n >= 2");
  Instance inst;
  inst.kind = kind;
  const int total = kind == Problem::tsp ? n : n + 1;
  inst.coords.reserve(total);
  for (int i = 0; i < total; ++i) inst.coords.push_back({rng.uniform(), rng.uniform()});
  if (kind == Problem::cvrp) {
    inst.capacity = capacity;
    inst.demands.assign(total, 0);
    for (int i = 1; i < total; ++i) inst.demands[i] = rng.uniform_int(1, 10);
  } else if (kind == Problem::op) {
    inst.distance_limit = distance_limit;
    double dmax = 0;
    for (int i = 1; i < total; ++i) dmax = std::max(dmax, dist(inst.coords[0], inst.coords[i]));
    inst.prizes.assign(total, 0);
    for (int i = 1; i < total; ++i) {
      inst.prizes[i] = dmax > 0 ? op_prize(dist(inst.coords[0], inst.coords[i]), dmax) : 1;
    }
  }
  validate_instance(inst);
  return inst;
}

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["id"] = inst.id;
  j["kind"] = problem_name(inst.kind);
  j["seed"] = inst.seed;
  j["coords"] = inst.coords;
  if (inst.kind == Problem::cvrp) {
    j["demands"] = inst.demands;
    j["capacity"] = inst.capacity;
  }
  if (inst.kind == Problem::op) {
    j["prizes"] = inst.prizes;
    j["distance_limit"] = inst.distance_limit;
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  inst.kind = problem_from_name(j.at("kind").get<std::string>());
  inst.id = j.value("id", 0LL);
  inst.seed = j.value("seed", std::uint64_t(0));
  inst.coords = j.at("coords").get<std::vector<Point>>();
  if (inst.kind == Problem::cvrp) {
    inst.demands = j.at("demands").get<std::vector<int>>();
    inst.capacity = j.at("capacity").get<int>();
  }
  if (inst.kind == Problem::op) {
    inst.prizes = j.at("prizes").get<std::vector<int>>();
    inst.distance_limit = j.at("distance_limit").get<double>();
  }
  validate_instance(inst);
  return inst;
}

namespace {

std::uint64_t fnv1a_file(const fs::path& path, std::uint64_t h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  return {{"version", m.version},
          {"problem", problem_name(m.kind)},
          {"n", m.n},
          {"count", m.count},
          {"seed", m.seed},
          {"capacity", m.capacity},
          {"distance_limit", m.distance_limit},
          {"labeled", m.labeled},
          {"checksum", m.checksum}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw ParseError("unsupported dataset version");
  m.kind = problem_from_name(j.at("problem").get<std::string>());
  m.n = j.at("n").get<int>();
  m.count = j.at("count").get<long long>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.capacity = j.at("capacity").get<int>();
  m.distance_limit = j.at("distance_limit").get<double>();
  m.labeled = j.at("labeled").get<bool>();
  m.checksum = j.at("checksum").get<std::string>();
  return m;
}

}  // namespace

std::string dataset_checksum(const std::string& dir) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a_file(fs::path(dir) / "instances.jsonl", h);
  const auto traj = fs::path(dir) / "trajectories.jsonl";
  if (fs::exists(traj)) h = fnv1a_file(traj, h);
  return to_hex(h);
}

DatasetManifest gen_dataset(const GenConfig& cfg) {
  if (cfg.count < 1) throw ConfigError("gen_dataset: count must be positive");
  const int capacity =
      cfg.kind == Problem::cvrp ? capacity_for(cfg.n, cfg.capacity) : 0;
  fs::create_directories(cfg.out_dir);

  std::vector<Instance> instances(cfg.count);
  std::vector<Trajectory> trajectories(cfg.labels ? cfg.count : 0);
  std::vector<std::string> errors(cfg.count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < cfg.count; ++i) {
    try {
      Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(i));
      Instance inst = gen_instance(cfg.kind, cfg.n, capacity, cfg.distance_limit, rng);
      inst.id = i;
      inst.seed = cfg.seed;
      if (cfg.labels) {
        auto sol = solve_oracle(inst);
        trajectories[i] = extract_trajectory(std::make_shared<Instance>(inst), sol);
      }
      instances[i] = std::move(inst);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SizeError("gen_dataset: " + e);
  }

  {
    std::ofstream out(fs::path(cfg.out_dir) / "instances.jsonl");
    if (!out) throw IoError("cannot write instances.jsonl in " + cfg.out_dir);
    for (const auto& inst : instances) out << instance_to_json(inst).dump() << "\n";
  }
  if (cfg.labels) {
    std::ofstream out(fs::path(cfg.out_dir) / "trajectories.jsonl");
    for (const auto& tr : trajectories) {
      out << nlohmann::json{{"id", tr.instance_id}, {"actions", tr.actions}, {"objective", tr.objective}}
                 .dump()
          << "\n";
    }
  } else {
    fs::remove(fs::path(cfg.out_dir) / "trajectories.jsonl");
  }

  DatasetManifest m;
  m.kind = cfg.kind;
  m.n = cfg.n;
  m.count = cfg.count;
  m.seed = cfg.seed;
  m.capacity = capacity;
  m.distance_limit = cfg.kind == Problem::op ? cfg.distance_limit : 0.0;
  m.labeled = cfg.labels;
  m.checksum = dataset_checksum(cfg.out_dir);
  std::ofstream mo(fs::path(cfg.out_dir) / "manifest.json");
  mo << manifest_to_json(m).dump(2) << "\n";
  return m;
}

Dataset load_dataset(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  std::ifstream min(mpath);
  if (!min) throw IoError("missing manifest: " + mpath.string());
  Dataset ds;
  try {
    ds.manifest = manifest_from_json(nlohmann::json::parse(min));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }

  auto parse_lines = [](const fs::path& path, auto&& handle) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    long long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        handle(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  };

  parse_lines(fs::path(dir) / "instances.jsonl", [&](const nlohmann::json& j) {
    ds.instances.push_back(std::make_shared<Instance>(instance_from_json(j)));
  });
  if (ds.manifest.labeled) {
    parse_lines(fs::path(dir) / "trajectories.jsonl", [&](const nlohmann::json& j) {
      Trajectory tr;
      tr.instance_id = j.at("id").get<long long>();
      tr.actions = j.at("actions").get<std::vector<int>>();
      tr.objective = j.at("objective").get<double>();
      ds.trajectories.push_back(std::move(tr));
    });
    if (ds.trajectories.size() != ds.instances.size()) {
      throw ParseError("dataset: instance/trajectory count mismatch");
    }
  }
  return ds;
}

}  // namespace rnco
