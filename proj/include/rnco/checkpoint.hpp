#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "rnco/param_store.hpp"

namespace rnco {

// Checkpoint layout under a directory:
//   config.json    arbitrary JSON header (model config, training metadata)
//   manifest.txt   one line per tensor: name dim0[,dim1,...] offset
//   params.bin     little-endian float32 blob, row-major, in manifest order
void save_checkpoint(const std::string& dir, const ParamStore<float>& params,
                     const nlohmann::json& header);

std::pair<ParamStore<float>, nlohmann::json> load_checkpoint(const std::string& dir);

}  // namespace rnco
