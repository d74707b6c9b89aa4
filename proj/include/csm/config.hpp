#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "csm/tagger.hpp"

namespace csm {

inline constexpr const char* kToolVersion = "0.1.0";

/// Flat JSON object keyed by TrainConfig field names. Missing keys keep their
/// defaults; unknown keys and wrong types are errors.
tagger::TrainConfig config_from_json(std::string_view text,
                                     tagger::TrainConfig base = {});
std::string config_to_json(const tagger::TrainConfig& config);
tagger::TrainConfig load_config(const std::string& path,
                                tagger::TrainConfig base = {});

/// Applies CSM_SEED from the environment when set.
void apply_seed_override(tagger::TrainConfig& config);

struct RunManifest {
  tagger::TrainConfig config;
  std::uint64_t schema_hash = 0;
  std::string corpus_path;
  std::string output_dir;
  std::string tool_version = kToolVersion;

  std::string to_json() const;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace csm
