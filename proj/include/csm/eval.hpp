#pragma once

#include <span>
#include <string>
#include <vector>

#include "csm/corpus.hpp"
#include "csm/ncsl.hpp"
#include "csm/tagger.hpp"

namespace csm::eval {

using corpus::TagSchema;

struct Counts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

/// Zero denominators give 0.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Metrics metrics(const Counts& c);

/// Token-level counts with O excluded. A token whose full tag matches a
/// non-O gold tag is a true positive for the gold tag's side; otherwise a
/// non-O prediction is a false positive for the predicted side and a non-O
/// gold tag is a false negative for the gold side.
struct MatchCounts {
  Counts entity;
  Counts trigger;
  Counts joint;

  MatchCounts& operator+=(const MatchCounts& o) {
    entity += o.entity;
    trigger += o.trigger;
    joint += o.joint;
    return *this;
  }
};

MatchCounts count_matches(std::span<const int> pred, std::span<const int> gold,
                          const TagSchema& schema);

/// Auxiliary exact-span matching (role, type and boundaries); not the
/// primary token-level metric.
Counts count_span_matches(std::span<const int> pred, std::span<const int> gold,
                          const TagSchema& schema);

enum class ReportSide { Entity, Trigger, Joint, SpanJoint };
inline constexpr ReportSide kReportSides[] = {ReportSide::Entity, ReportSide::Trigger,
                                              ReportSide::Joint, ReportSide::SpanJoint};
std::string to_string(ReportSide side);

struct FoldResult {
  int fold = 0;
  MatchCounts tokens;
  Counts spans;

  const Counts& counts(ReportSide side) const;
};

struct EvalReport {
  std::vector<FoldResult> folds;

  double mean_f1(ReportSide side) const;
  /// Sample standard deviation across folds (0 with a single fold).
  double std_f1(ReportSide side) const;
  /// `fold,side,tp,fp,fn,precision,recall,f1` with trailing mean/std rows.
  std::string to_csv() const;
};

FoldResult evaluate(const tagger::TaggerParams& params, const corpus::Corpus& test,
                    int fold = 1);

/// Trains on the training corpus with the given cross-supervision mode,
/// building the HIN from this corpus only.
tagger::TrainResult train_with_mode(const corpus::Corpus& train,
                                    const tagger::TrainConfig& config,
                                    ncsl::MatrixMode mode);

/// k-fold protocol with config.folds folds; folds run on up to `jobs`
/// threads and are merged in fold order.
EvalReport crossval(const corpus::Corpus& corpus, const tagger::TrainConfig& config,
                    ncsl::MatrixMode mode, int jobs = 1);

struct SweepRow {
  int meta_path_length = 0;
  int folds = 0;
  double mean_f1_joint = 0.0;
  double std_f1_joint = 0.0;
  double mean_f1_entity = 0.0;
  double mean_f1_trigger = 0.0;
};

std::vector<SweepRow> sensitivity_sweep(const corpus::Corpus& corpus,
                                        const tagger::TrainConfig& config,
                                        std::span<const int> l_values,
                                        std::span<const int> fold_values,
                                        ncsl::MatrixMode mode, int jobs = 1);

/// `meta_path_length,folds,mean_f1_joint,std_f1_joint,mean_f1_entity,mean_f1_trigger`
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace csm::eval
