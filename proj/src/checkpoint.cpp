#include "rnco/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace rnco {

namespace {

void to_little_endian(std::vector<float>& v) {
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : v) {
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      u = __builtin_bswap32(u);
      std::memcpy(&f, &u, 4);
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& dir, const ParamStore<float>& params,
                     const nlohmann::json& header) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "config.json");
    if (!out) throw IoError("cannot write config.json in " + dir);
    out << header.dump(2) << "\n";
  }
  std::ofstream manifest(fs::path(dir) / "manifest.txt");
  std::ofstream blob(fs::path(dir) / "params.bin", std::ios::binary);
  if (!manifest || !blob) throw IoError("cannot write checkpoint files in " + dir);
  long long offset = 0;
  for (const auto& name : params.names()) {
    const auto& t = params.at(name);
    manifest << name << " ";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
      manifest << (i ? "," : "") << t.shape[i];
    }
    manifest << " " << offset << "\n";
    std::vector<float> data = *t.data;
    to_little_endian(data);
    blob.write(reinterpret_cast<const char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float)));
    offset += t.size();
  }
}

std::pair<ParamStore<float>, nlohmann::json> load_checkpoint(const std::string& dir) {
  std::ifstream cfg(fs::path(dir) / "config.json");
  if (!cfg) throw IoError("missing checkpoint config: " + dir);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config.json: ") + e.what());
  }

  std::ifstream manifest(fs::path(dir) / "manifest.txt");
  std::ifstream blob(fs::path(dir) / "params.bin", std::ios::binary);
  if (!manifest || !blob) throw IoError("missing checkpoint files in " + dir);

  ParamStore<float> params;
  std::string line;
  long long lineno = 0;
  while (std::getline(manifest, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string name, shape_csv;
    long long offset;
    if (!(is >> name >> shape_csv >> offset)) {
      throw ParseError("manifest.txt:" + std::to_string(lineno) + ": malformed line");
    }
    std::vector<int> shape;
    std::istringstream ss(shape_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) shape.push_back(std::stoi(tok));
    const long long count = Tensor<float>::numel(shape);
    std::vector<float> data(static_cast<std::size_t>(count));
    blob.seekg(offset * static_cast<long long>(sizeof(float)));
    blob.read(reinterpret_cast<char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!blob) throw ParseError("params.bin: truncated blob reading " + name);
    to_little_endian(data);
    params.add(name, Tensor<float>::from(std::move(shape), std::move(data)));
  }
  return {std::move(params), std::move(header)};
}

}  // namespace rnco
