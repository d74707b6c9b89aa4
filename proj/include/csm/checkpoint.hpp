#pragma once

#include <cstdint>
#include <string>

#include "csm/corpus.hpp"
#include "csm/tagger.hpp"

namespace csm {

/// Binary container:
///
///   "CSM1" | u64 header length (LE) | JSON header | f64 data (LE)
///
/// The header names every parameter array with its shape, in storage order,
/// and carries the schema, its hash, the vocab and the training config. Data
/// follows as row-major doubles, one array after another.
struct Checkpoint {
  tagger::TaggerParams params;
  corpus::TagSchema schema;
  corpus::Vocab vocab;
  tagger::TrainConfig config;
};

inline constexpr char kCheckpointMagic[4] = {'C', 'S', 'M', '1'};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace csm
