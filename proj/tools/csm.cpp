// Command-line front end: train, eval, crossval, hin, sweep, synth.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "csm/checkpoint.hpp"
#include "csm/config.hpp"
#include "csm/corpus.hpp"
#include "csm/eval.hpp"
#include "csm/hin.hpp"

namespace fs = std::filesystem;
using namespace csm;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::optional<double> alpha;
  std::optional<std::string> mode;
  std::optional<int> folds;
  std::optional<int> meta_path_length;
  std::optional<int> epochs;

  void add_to(CLI::App* app, bool with_folds) {
    app->add_option("--config", config_path, "TrainConfig JSON file");
    app->add_option("--alpha", alpha, "cross-supervision ratio in [0, 1]");
    app->add_option("--mode", mode, "direct, metapath or none (tagger only)");
    app->add_option("--l", meta_path_length, "meta-path length (odd)");
    app->add_option("--epochs", epochs, "training epochs");
    if (with_folds) app->add_option("--folds", folds, "number of folds");
  }

  tagger::TrainConfig resolve() const {
    tagger::TrainConfig c =
        config_path.empty() ? tagger::TrainConfig{} : load_config(config_path);
    if (alpha) c.alpha = *alpha;
    if (mode) c.matrix_mode = ncsl::parse_matrix_mode(*mode);
    if (folds) c.folds = *folds;
    if (meta_path_length) c.meta_path_length = *meta_path_length;
    if (epochs) c.epochs = *epochs;
    apply_seed_override(c);
    c.validate();
    return c;
  }
};

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    write_file(path, contents);
  }
}

corpus::TagSchema load_schema(const std::string& path) {
  return corpus::TagSchema::from_json(read_file(path));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("not an integer list: '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty integer list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-supervised joint entity and trigger extraction"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a tagger and write a checkpoint");
  ConfigArgs train_cfg;
  std::string train_corpus, train_schema, train_out;
  train_cfg.add_to(train, false);
  train->add_option("--corpus", train_corpus, "training corpus (token<TAB>tag)")->required();
  train->add_option("--schema", train_schema, "schema JSON")->required();
  train->add_option("--out", train_out, "output directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  std::string eval_ckpt, eval_corpus, eval_schema, eval_out;
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  ev->add_option("--corpus", eval_corpus, "test corpus")->required();
  ev->add_option("--schema", eval_schema, "schema JSON (must match the checkpoint)");
  ev->add_option("--out", eval_out, "report CSV (default stdout)");

  // crossval
  auto* cv = app.add_subcommand("crossval", "k-fold cross-validation");
  ConfigArgs cv_cfg;
  std::string cv_corpus, cv_schema, cv_out;
  int cv_jobs = 1;
  cv_cfg.add_to(cv, true);
  cv->add_option("--corpus", cv_corpus, "corpus")->required();
  cv->add_option("--schema", cv_schema, "schema JSON")->required();
  cv->add_option("--out", cv_out, "report CSV (default stdout)");
  cv->add_option("--jobs", cv_jobs, "folds trained concurrently");

  // hin
  auto* hn = app.add_subcommand("hin", "export the HIN and its adjacency matrices");
  std::string hin_corpus, hin_schema, hin_out, hin_direct, hin_edges;
  int hin_l = 3;
  hn->add_option("--corpus", hin_corpus, "corpus")->required();
  hn->add_option("--schema", hin_schema, "schema JSON")->required();
  hn->add_option("--l", hin_l, "meta-path length (odd)");
  hn->add_option("--out", hin_out, "meta-path matrix CSV (default stdout)");
  hn->add_option("--direct-out", hin_direct, "direct matrix CSV");
  hn->add_option("--edges-out", hin_edges, "edge list CSV");

  // sweep
  auto* sw = app.add_subcommand("sweep", "sensitivity over meta-path length and folds");
  ConfigArgs sw_cfg;
  std::string sw_corpus, sw_schema, sw_out, sw_l = "1,3,5", sw_folds = "5,6,7,8,9,10";
  int sw_jobs = 1;
  sw_cfg.add_to(sw, false);
  sw->add_option("--corpus", sw_corpus, "corpus")->required();
  sw->add_option("--schema", sw_schema, "schema JSON")->required();
  sw->add_option("--lengths", sw_l, "comma-separated meta-path lengths");
  sw->add_option("--fold-values", sw_folds, "comma-separated fold counts");
  sw->add_option("--out", sw_out, "sweep CSV (default stdout)");
  sw->add_option("--jobs", sw_jobs, "folds trained concurrently");

  // synth
  auto* sy = app.add_subcommand("synth", "generate a synthetic annotated corpus");
  std::string sy_schema, sy_profile, sy_out, sy_schema_out;
  int sy_sentences = 500;
  std::uint64_t sy_seed = 7;
  sy->add_option("--schema", sy_schema, "schema JSON (default: 5 entity, 3 trigger types)");
  sy->add_option("--profile", sy_profile, "co-occurrence profile JSON");
  sy->add_option("--sentences", sy_sentences, "number of sentences");
  sy->add_option("--seed", sy_seed, "generator seed");
  sy->add_option("--out", sy_out, "corpus file (default stdout)");
  sy->add_option("--schema-out", sy_schema_out, "also write the schema JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*train) {
      const auto config = train_cfg.resolve();
      const auto schema = load_schema(train_schema);
      const auto data = corpus::load_corpus(train_corpus, schema);
      fs::create_directories(train_out);
      RunManifest manifest{config, schema.hash(), train_corpus, train_out};
      write_file((fs::path(train_out) / "manifest.json").string(), manifest.to_json());
      const auto result = eval::train_with_mode(data, config, config.matrix_mode);
      save_checkpoint((fs::path(train_out) / "checkpoint").string(),
                      {result.params, schema, data.vocab, config});
      write_file((fs::path(train_out) / "losses.csv").string(),
                 tagger::loss_log_csv(result.log, config.alpha, config.matrix_mode));
    } else if (*ev) {
      auto ckpt = load_checkpoint(eval_ckpt);
      if (!eval_schema.empty() && load_schema(eval_schema).hash() != ckpt.schema.hash()) {
        throw ValidationError("schema does not match the checkpoint");
      }
      auto test = corpus::load_corpus(eval_corpus, ckpt.schema);
      test.vocab = ckpt.vocab;
      eval::EvalReport report;
      report.folds.push_back(eval::evaluate(ckpt.params, test, 1));
      emit(eval_out, report.to_csv());
    } else if (*cv) {
      const auto config = cv_cfg.resolve();
      const auto data = corpus::load_corpus(cv_corpus, load_schema(cv_schema));
      emit(cv_out, eval::crossval(data, config, config.matrix_mode, cv_jobs).to_csv());
    } else if (*hn) {
      const auto schema = load_schema(hin_schema);
      const auto data = corpus::load_corpus(hin_corpus, schema);
      const auto graph = hin::build_hin(data);
      const auto mats = hin::build_matrices(graph, hin_l);
      std::ostringstream meta;
      hin::write_matrix_csv(meta, schema, mats.meta, &mats.reached);
      emit(hin_out, meta.str());
      if (!hin_direct.empty()) {
        std::ostringstream direct;
        hin::write_matrix_csv(direct, schema, mats.direct);
        write_file(hin_direct, direct.str());
      }
      if (!hin_edges.empty()) {
        std::ostringstream edges;
        hin::write_edges_csv(edges, graph);
        write_file(hin_edges, edges.str());
      }
    } else if (*sw) {
      const auto config = sw_cfg.resolve();
      const auto data = corpus::load_corpus(sw_corpus, load_schema(sw_schema));
      const auto ls = parse_int_list(sw_l);
      const auto ks = parse_int_list(sw_folds);
      emit(sw_out, eval::sweep_csv(eval::sensitivity_sweep(data, config, ls, ks,
                                                           config.matrix_mode, sw_jobs)));
    } else if (*sy) {
      const auto schema =
          sy_schema.empty() ? corpus::default_synthetic_schema() : load_schema(sy_schema);
      const auto profile = sy_profile.empty()
                               ? corpus::default_profile(schema)
                               : corpus::profile_from_json(read_file(sy_profile), schema);
      const auto data = corpus::generate_synthetic(schema, sy_sentences, sy_seed, profile);
      if (!sy_schema_out.empty()) write_file(sy_schema_out, schema.to_json() + "\n");
      emit(sy_out, corpus::serialize(data));
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
