#include "csm/eval.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

namespace csm::eval {

Metrics metrics(const Counts& c) {
  Metrics m;
  if (c.tp + c.fp > 0) m.precision = double(c.tp) / double(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = double(c.tp) / double(c.tp + c.fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

MatchCounts count_matches(std::span<const int> pred, std::span<const int> gold,
                          const TagSchema& schema) {
  if (pred.size() != gold.size()) {
    throw ValidationError("count_matches: " + std::to_string(pred.size()) +
                          " predicted tags for " + std::to_string(gold.size()) +
                          " gold tags");
  }
  MatchCounts out;
  auto side = [&](int tag) -> Counts& {
    return schema.role(tag) == Role::Entity ? out.entity : out.trigger;
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int p = pred[i];
    const int g = gold[i];
    if (p < 0 || p >= schema.num_tags() || g < 0 || g >= schema.num_tags()) {
      throw ValidationError("count_matches: tag index out of range");
    }
    if (p == g) {
      if (g != TagSchema::kOutside) side(g).tp++;
      continue;
    }
    if (p != TagSchema::kOutside) side(p).fp++;
    if (g != TagSchema::kOutside) side(g).fn++;
  }
  out.joint = out.entity;
  out.joint += out.trigger;
  return out;
}

Counts count_span_matches(std::span<const int> pred, std::span<const int> gold,
                          const TagSchema& schema) {
  if (pred.size() != gold.size()) {
    throw ValidationError("count_span_matches: length mismatch");
  }
  // Repair dangling I- tags the way a lenient span reader would: they open a
  // new span.
  auto spans = [&](std::span<const int> tags) {
    std::set<std::tuple<int, int, int>> out;  // (begin, end, tag of B)
    int start = -1;
    int begin_tag = TagSchema::kOutside;
    for (int i = 0; i <= static_cast<int>(tags.size()); ++i) {
      const int t = i < static_cast<int>(tags.size()) ? tags[i] : TagSchema::kOutside;
      const bool continues = start >= 0 && t == begin_tag + 1;
      if (continues) continue;
      if (start >= 0) out.emplace(start, i, begin_tag);
      start = -1;
      if (t != TagSchema::kOutside) {
        start = i;
        begin_tag = schema.is_begin(t) ? t : t - 1;
      }
    }
    return out;
  };
  const auto ps = spans(pred);
  const auto gs = spans(gold);
  Counts c;
  for (const auto& s : ps) (gs.count(s) ? c.tp : c.fp)++;
  for (const auto& s : gs) c.fn += !ps.count(s);
  return c;
}

std::string to_string(ReportSide side) {
  switch (side) {
    case ReportSide::Entity:
      return "entity";
    case ReportSide::Trigger:
      return "trigger";
    case ReportSide::Joint:
      return "joint";
    case ReportSide::SpanJoint:
      return "span_joint";
  }
  return "joint";
}

const Counts& FoldResult::counts(ReportSide side) const {
  switch (side) {
    case ReportSide::Entity:
      return tokens.entity;
    case ReportSide::Trigger:
      return tokens.trigger;
    case ReportSide::Joint:
      return tokens.joint;
    case ReportSide::SpanJoint:
      return spans;
  }
  return tokens.joint;
}

namespace {

std::string fixed(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

template <typename F>
std::pair<double, double> mean_std(const std::vector<FoldResult>& folds, F&& value) {
  if (folds.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (const auto& f : folds) sum += value(f);
  const double mean = sum / double(folds.size());
  if (folds.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const auto& f : folds) ss += (value(f) - mean) * (value(f) - mean);
  return {mean, std::sqrt(ss / double(folds.size() - 1))};
}

}  // namespace

double EvalReport::mean_f1(ReportSide side) const {
  return mean_std(folds, [&](const FoldResult& f) { return metrics(f.counts(side)).f1; })
      .first;
}

double EvalReport::std_f1(ReportSide side) const {
  return mean_std(folds, [&](const FoldResult& f) { return metrics(f.counts(side)).f1; })
      .second;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "fold,side,tp,fp,fn,precision,recall,f1\n";
  for (const auto& f : folds) {
    for (ReportSide side : kReportSides) {
      const Counts& c = f.counts(side);
      const Metrics m = metrics(c);
      out << f.fold << ',' << to_string(side) << ',' << c.tp << ',' << c.fp << ','
          << c.fn << ',' << fixed(m.precision) << ',' << fixed(m.recall) << ','
          << fixed(m.f1) << '\n';
    }
  }
  for (int which = 0; which < 2; ++which) {
    for (ReportSide side : kReportSides) {
      auto stat = [&](auto&& value) {
        const auto [mean, sd] = mean_std(folds, value);
        return fixed(which == 0 ? mean : sd);
      };
      out << (which == 0 ? "mean" : "std") << ',' << to_string(side) << ','
          << stat([&](const FoldResult& f) { return double(f.counts(side).tp); }) << ','
          << stat([&](const FoldResult& f) { return double(f.counts(side).fp); }) << ','
          << stat([&](const FoldResult& f) { return double(f.counts(side).fn); }) << ','
          << stat([&](const FoldResult& f) { return metrics(f.counts(side)).precision; })
          << ','
          << stat([&](const FoldResult& f) { return metrics(f.counts(side)).recall; })
          << ',' << stat([&](const FoldResult& f) { return metrics(f.counts(side)).f1; })
          << '\n';
    }
  }
  return out.str();
}

FoldResult evaluate(const tagger::TaggerParams& params, const corpus::Corpus& test,
                    int fold) {
  FoldResult r;
  r.fold = fold;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto pred = tagger::predict_tags(params, test.encode(i));
    const auto& gold = test.sentences[i].tags;
    r.tokens += count_matches(pred, gold, test.schema);
    r.spans += count_span_matches(pred, gold, test.schema);
  }
  return r;
}

}  // namespace csm::eval
