#include "csm/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "csm/config.hpp"
#include "json.hpp"

namespace csm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

std::string encode_checkpoint(const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["format"] = "CSM1";
  header["schema"] = nlohmann::ordered_json::parse(ckpt.schema.to_json());
  header["schema_hash"] = ckpt.schema.hash();
  header["vocab"] = ckpt.vocab.tokens();
  header["config"] = nlohmann::ordered_json::parse(config_to_json(ckpt.config));
  auto& arrays = header["arrays"] = nlohmann::ordered_json::array();
  std::string data;
  ckpt.params.for_each([&](const std::string& name, const Eigen::MatrixXd& m) {
    arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        char buf[sizeof v];
        std::memcpy(buf, &v, sizeof v);
        data.append(buf, sizeof v);
      }
    }
  });
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  std::string out(kCheckpointMagic, 4);
  char lenbuf[sizeof len];
  std::memcpy(lenbuf, &len, sizeof len);
  out.append(lenbuf, sizeof len);
  out += text;
  out += data;
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw ValidationError("checkpoint: missing CSM1 magic");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 4, sizeof len);
  if (len > bytes.size() - 12) throw ValidationError("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: bad header: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.schema = corpus::TagSchema::from_json(header.at("schema").dump());
  if (header.at("schema_hash").get<std::uint64_t>() != ckpt.schema.hash()) {
    throw ValidationError("checkpoint: schema hash mismatch");
  }
  ckpt.vocab = corpus::Vocab::from_tokens(header.at("vocab").get<std::vector<std::string>>());
  ckpt.config = config_from_json(header.at("config").dump());

  // Rebuild the layout from the config, then check it against the header.
  ckpt.params = tagger::TaggerParams::init(ckpt.vocab.size(), ckpt.schema.num_tags(),
                                           ckpt.config, 0);
  const auto& arrays = header.at("arrays");
  std::size_t k = 0;
  std::size_t offset = 12 + len;
  ckpt.params.for_each([&](const std::string& name, Eigen::MatrixXd& m) {
    if (k >= arrays.size() || arrays[k].at("name") != name ||
        arrays[k].at("rows").get<Eigen::Index>() != m.rows() ||
        arrays[k].at("cols").get<Eigen::Index>() != m.cols()) {
      throw ValidationError("checkpoint: array layout mismatch at '" + name + "'");
    }
    const std::size_t need = static_cast<std::size_t>(m.size()) * sizeof(double);
    if (offset + need > bytes.size()) throw ValidationError("checkpoint: truncated data");
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::memcpy(&m(r, c), bytes.data() + offset, sizeof(double));
        offset += sizeof(double);
      }
    }
    ++k;
  });
  if (k != arrays.size() || offset != bytes.size()) {
    throw ValidationError("checkpoint: trailing arrays or bytes");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace csm
