#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "csm/checkpoint.hpp"
#include "csm/config.hpp"
#include "doctest.h"

using namespace csm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("csm_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + std::string(CSM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string run_capture_err(const std::string& args, const TempDir& dir) {
  const std::string err = dir / "stderr.txt";
  (void)!std::system((std::string(CSM_CLI_PATH) + " " + args + " >/dev/null 2>" + err).c_str());
  return read_file(err);
}

}  // namespace

TEST_CASE("config JSON round trip") {
  tagger::TrainConfig c;
  c.alpha = 0.3;
  c.d_emb = 17;
  c.dropout = 0.123456789;
  c.learning_rate = 1e-3;
  c.seed = 18446744073709551615ULL;
  c.matrix_mode = ncsl::MatrixMode::Direct;
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json(config_to_json(tagger::TrainConfig{})) == tagger::TrainConfig{});
}

TEST_CASE("config validation") {
  CHECK(config_from_json(R"({"alpha": 0})").alpha == 0.0);
  CHECK(config_from_json("{}") == tagger::TrainConfig{});
  CHECK_THROWS_AS(config_from_json(R"({"alpah": 0.5})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"alpha": "high"})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"alpha": 1.5})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"dropout": 1.0})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"meta_path_length": 2})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"d_hid": 0})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"epochs": 2.5})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(R"({"matrix_mode": "both"})"), ValidationError);
  CHECK_THROWS_AS(config_from_json("[]"), ValidationError);
  CHECK_THROWS_AS(config_from_json("{"), ValidationError);
}

TEST_CASE("defaults and desk profile") {
  const tagger::TrainConfig d;
  CHECK(d.d_emb == 300);
  CHECK(d.d_hid == 128);
  CHECK(d.n_layers == 2);
  CHECK(d.dropout == 0.5);
  CHECK(d.learning_rate == 0.02);
  CHECK(d.epochs == 30);
  CHECK(d.batch_size == 256);
  CHECK(d.meta_path_length == 3);
  CHECK(d.folds == 10);
  const auto desk = tagger::TrainConfig::desk_scale();
  CHECK(desk.d_emb == 32);
  CHECK(desk.d_hid == 16);
  CHECK(desk.n_layers == 1);
  CHECK(desk.epochs == 10);
}

TEST_CASE("CSM_SEED overrides the seed") {
  tagger::TrainConfig c;
  setenv("CSM_SEED", "42", 1);
  apply_seed_override(c);
  CHECK(c.seed == 42);
  setenv("CSM_SEED", "x1", 1);
  CHECK_THROWS_AS(apply_seed_override(c), ValidationError);
  unsetenv("CSM_SEED");
  apply_seed_override(c);
  CHECK(c.seed == 42);
}

TEST_CASE("checkpoint round trip") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data = corpus::generate_synthetic(schema, 20, 1, corpus::default_profile(schema));
  auto config = tagger::TrainConfig::desk_scale();
  config.n_layers = 2;
  const Checkpoint ckpt{
      tagger::TaggerParams::init(data.vocab.size(), schema.num_tags(), config, 3), schema,
      data.vocab, config};
  const auto bytes = encode_checkpoint(ckpt);
  CHECK(bytes.substr(0, 4) == "CSM1");
  const auto back = decode_checkpoint(bytes);
  CHECK(back.params == ckpt.params);
  CHECK(back.schema == schema);
  CHECK(back.vocab == data.vocab);
  CHECK(back.config == config);
  CHECK(encode_checkpoint(back) == bytes);

  SUBCASE("corruption is detected") {
    CHECK_THROWS_AS(decode_checkpoint("XSM1" + bytes.substr(4)), ValidationError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 8)), ValidationError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "extra"), ValidationError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, 10)), ValidationError);
  }
  SUBCASE("file round trip") {
    TempDir dir;
    save_checkpoint(dir / "ck", ckpt);
    CHECK(load_checkpoint(dir / "ck").params == ckpt.params);
  }
}

TEST_CASE("command line") {
  TempDir dir;
  const std::string corpus = dir / "c.tsv", schema = dir / "s.json";
  REQUIRE(run("synth --sentences 40 --seed 7 --out " + corpus + " --schema-out " + schema) ==
          0);
  write_file(dir / "cfg.json",
             R"({"d_emb": 8, "d_hid": 4, "n_layers": 1, "epochs": 1, "batch_size": 8})");

  SUBCASE("synth is byte-stable") {
    REQUIRE(run("synth --sentences 40 --seed 7 --out " + (dir / "c2.tsv")) == 0);
    CHECK(read_file(corpus) == read_file(dir / "c2.tsv"));
  }
  SUBCASE("train writes checkpoint, manifest and loss log; eval reads them") {
    const std::string out = dir / "run";
    REQUIRE(run("train --config " + (dir / "cfg.json") + " --corpus " + corpus +
                " --schema " + schema + " --out " + out) == 0);
    CHECK(fs::exists(out + "/checkpoint"));
    CHECK(fs::exists(out + "/manifest.json"));
    const auto log = read_file(out + "/losses.csv");
    CHECK(log.rfind("epoch,batch,L_seq,L_hin,L_c,alpha,mode\n", 0) == 0);
    REQUIRE(run("eval --checkpoint " + out + "/checkpoint --corpus " + corpus +
                " --schema " + schema + " --out " + (dir / "report.csv")) == 0);
    CHECK(read_file(dir / "report.csv").rfind("fold,side,", 0) == 0);

    write_file(dir / "other.json", R"({"entity_types":["A"],"trigger_types":["B"]})");
    CHECK(run("eval --checkpoint " + out + "/checkpoint --corpus " + corpus +
              " --schema " + (dir / "other.json")) == 1);
  }
  SUBCASE("crossval emits one row block per fold") {
    REQUIRE(run("crossval --config " + (dir / "cfg.json") + " --folds 4 --corpus " +
                corpus + " --schema " + schema + " --out " + (dir / "cv.csv")) == 0);
    std::ifstream in(dir / "cv.csv");
    std::string line;
    int joint = 0;
    while (std::getline(in, line)) joint += line.find(",joint,") != std::string::npos;
    CHECK(joint == 4 + 2);
  }
  SUBCASE("hin exports") {
    REQUIRE(run("hin --corpus " + corpus + " --schema " + schema + " --l 3 --out " +
                (dir / "m.csv") + " --direct-out " + (dir / "d.csv") + " --edges-out " +
                (dir / "e.csv")) == 0);
    CHECK(read_file(dir / "m.csv").rfind(",Movement,Conflict,Transaction\n", 0) == 0);
    CHECK(read_file(dir / "e.csv").rfind("entity_key,", 0) == 0);
  }
  SUBCASE("errors") {
    const auto err = run_capture_err("train --corpus " + (dir / "missing.tsv") +
                                         " --schema " + schema + " --out " + (dir / "r"),
                                     dir);
    CHECK(err.find("missing.tsv") != std::string::npos);
    CHECK(run("train --corpus " + (dir / "missing.tsv") + " --schema " + schema +
              " --out " + (dir / "r")) == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("hin --corpus " + corpus) == 1);
    CHECK(run("hin --corpus " + corpus + " --schema " + schema + " --l 2") == 1);
    CHECK(run("crossval --alpha 2 --corpus " + corpus + " --schema " + schema) == 1);
    CHECK(run("crossval --corpus " + corpus + " --schema " + schema, "CSM_SEED=abc") == 1);
  }
}
