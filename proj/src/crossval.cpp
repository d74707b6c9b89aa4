#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>

#include "csm/eval.hpp"
#include "csm/hin.hpp"

namespace csm::eval {

tagger::TrainResult train_with_mode(const corpus::Corpus& train,
                                    const tagger::TrainConfig& config,
                                    ncsl::MatrixMode mode) {
  if (mode == ncsl::MatrixMode::None) return tagger::train(train, config, nullptr);
  const hin::Hin graph = hin::build_hin(train);
  hin::MetaPathMatrix matrices;
  if (mode == ncsl::MatrixMode::MetaPath) {
    matrices = hin::build_matrices(graph, config.meta_path_length);
  } else {
    matrices.direct = hin::direct_adjacency(graph, train.schema);
  }
  const ncsl::Converter converter(mode, matrices);
  return tagger::train(train, config, &converter);
}

EvalReport crossval(const corpus::Corpus& corpus, const tagger::TrainConfig& config,
                    ncsl::MatrixMode mode, int jobs) {
  config.validate();
  if (jobs < 1) throw ValidationError("crossval: jobs must be at least 1");
  const auto folds = corpus::kfold_split(corpus, config.folds, config.seed);
  EvalReport report;
  report.folds.resize(folds.size());
  std::vector<std::exception_ptr> errors(folds.size());
  const auto n = static_cast<std::ptrdiff_t>(folds.size());

#pragma omp parallel for num_threads(jobs) schedule(dynamic) if (jobs > 1)
  for (std::ptrdiff_t f = 0; f < n; ++f) {
    try {
      tagger::TrainConfig fold_config = config;
      fold_config.seed = mix_seed(config.seed, 100 + static_cast<std::uint64_t>(f));
      const auto trained = train_with_mode(folds[f].train, fold_config, mode);
      report.folds[f] = evaluate(trained.params, folds[f].test, static_cast<int>(f) + 1);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

std::vector<SweepRow> sensitivity_sweep(const corpus::Corpus& corpus,
                                        const tagger::TrainConfig& config,
                                        std::span<const int> l_values,
                                        std::span<const int> fold_values,
                                        ncsl::MatrixMode mode, int jobs) {
  for (int l : l_values) {
    if (l < 1 || l % 2 == 0) {
      throw ValidationError("sensitivity_sweep: meta-path length " + std::to_string(l) +
                            " is not odd and positive");
    }
  }
  std::vector<SweepRow> rows;
  for (int l : l_values) {
    for (int k : fold_values) {
      tagger::TrainConfig c = config;
      c.meta_path_length = l;
      c.folds = k;
      const EvalReport r = crossval(corpus, c, mode, jobs);
      rows.push_back({l, k, r.mean_f1(ReportSide::Joint), r.std_f1(ReportSide::Joint),
                      r.mean_f1(ReportSide::Entity), r.mean_f1(ReportSide::Trigger)});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "meta_path_length,folds,mean_f1_joint,std_f1_joint,mean_f1_entity,"
         "mean_f1_trigger\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f,%.6f\n", r.meta_path_length,
                  r.folds, r.mean_f1_joint, r.std_f1_joint, r.mean_f1_entity,
                  r.mean_f1_trigger);
    out << buf;
  }
  return out.str();
}

}  // namespace csm::eval
