#include "csm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace csm {

using nlohmann::json;
using tagger::TrainConfig;

namespace {

nlohmann::ordered_json to_object(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["alpha"] = c.alpha;
  j["d_emb"] = c.d_emb;
  j["d_hid"] = c.d_hid;
  j["n_layers"] = c.n_layers;
  j["dropout"] = c.dropout;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["meta_path_length"] = c.meta_path_length;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["matrix_mode"] = ncsl::to_string(c.matrix_mode);
  return j;
}

template <typename T>
T read_number(const json& v, const std::string& key) {
  if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ValidationError("config: '" + key + "' must be a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw ValidationError("config: '" + key + "' must be a non-negative integer");
    }
  } else {
    if (!v.is_number_integer()) {
      throw ValidationError("config: '" + key + "' must be an integer");
    }
  }
  return v.get<T>();
}

}  // namespace

TrainConfig config_from_json(std::string_view text, TrainConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "alpha") c.alpha = read_number<double>(v, key);
    else if (key == "d_emb") c.d_emb = read_number<int>(v, key);
    else if (key == "d_hid") c.d_hid = read_number<int>(v, key);
    else if (key == "n_layers") c.n_layers = read_number<int>(v, key);
    else if (key == "dropout") c.dropout = read_number<double>(v, key);
    else if (key == "learning_rate") c.learning_rate = read_number<double>(v, key);
    else if (key == "epochs") c.epochs = read_number<int>(v, key);
    else if (key == "batch_size") c.batch_size = read_number<int>(v, key);
    else if (key == "meta_path_length") c.meta_path_length = read_number<int>(v, key);
    else if (key == "folds") c.folds = read_number<int>(v, key);
    else if (key == "seed") c.seed = read_number<std::uint64_t>(v, key);
    else if (key == "matrix_mode") {
      if (!v.is_string()) throw ValidationError("config: 'matrix_mode' must be a string");
      c.matrix_mode = ncsl::parse_matrix_mode(v.get<std::string>());
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::string config_to_json(const TrainConfig& config) {
  return to_object(config).dump(2) + "\n";
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
  return config_from_json(read_file(path), base);
}

void apply_seed_override(TrainConfig& config) {
  const char* env = std::getenv("CSM_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') {
    throw ValidationError(std::string("CSM_SEED is not a non-negative integer: ") + env);
  }
  config.seed = v;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["seed"] = config.seed;
  j["schema_hash"] = schema_hash;
  j["corpus_path"] = corpus_path;
  j["output_dir"] = output_dir;
  j["config"] = to_object(config);
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace csm
