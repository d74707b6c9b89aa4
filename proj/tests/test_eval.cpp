#include <cmath>
#include <sstream>

#include "csm/eval.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace csm;
using namespace csm::eval;

namespace {

int count_lines(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

tagger::TrainConfig tiny_config() {
  auto c = tagger::TrainConfig::desk_scale();
  c.epochs = 2;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST_CASE("count_matches on the ten-sentence fixture") {
  const auto s = fixture::metric_schema();
  MatchCounts total;
  for (const auto& p : fixture::metric_sentences()) total += count_matches(p.pred, p.gold, s);
  CHECK(total.entity == fixture::kEntity);
  CHECK(total.trigger == fixture::kTrigger);
  CHECK(total.joint == fixture::kJoint);
  CHECK(total.joint.tp == total.entity.tp + total.trigger.tp);

  const auto m = metrics(total.joint);
  CHECK(m.precision == doctest::Approx(9.0 / 13.0));
  CHECK(m.recall == doctest::Approx(9.0 / 14.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("count_matches small cases") {
  const auto s = fixture::metric_schema();
  SUBCASE("perfect prediction") {
    const std::vector<int> g = {1, 2, 0, 5, 3};
    const auto c = count_matches(g, g, s);
    CHECK(c.joint.fp == 0);
    CHECK(c.joint.fn == 0);
    CHECK(metrics(c.joint).precision == 1.0);
    CHECK(metrics(c.joint).recall == 1.0);
  }
  SUBCASE("gold O, predicted B-ENT:PER") {
    const std::vector<int> g = {0}, p = {1};
    const auto c = count_matches(p, g, s);
    CHECK(c.entity == Counts{0, 1, 0});
  }
  SUBCASE("tp=1, fp=1, fn=0") {
    const std::vector<int> g = {1, 0}, p = {1, 1};
    const auto c = count_matches(p, g, s);
    CHECK(c.joint == Counts{1, 1, 0});
    const auto m = metrics(c.joint);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("all gold O and all predictions O: zero denominators") {
    const std::vector<int> g = {0, 0, 0};
    const auto c = count_matches(g, g, s);
    CHECK(c.joint == Counts{0, 0, 0});
    const auto m = metrics(c.joint);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
  }
  SUBCASE("all gold O with spurious predictions: recall denominator zero") {
    const std::vector<int> g = {0, 0}, p = {5, 0};
    const auto m = metrics(count_matches(p, g, s).joint);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
  }
  CHECK_THROWS_AS(count_matches(std::vector<int>{0}, std::vector<int>{0, 0}, s),
                  ValidationError);
}

TEST_CASE("counts are permutation-equivariant over sentences") {
  const auto s = fixture::metric_schema();
  auto pairs = fixture::metric_sentences();
  MatchCounts a, b;
  for (const auto& p : pairs) a += count_matches(p.pred, p.gold, s);
  std::reverse(pairs.begin(), pairs.end());
  for (const auto& p : pairs) b += count_matches(p.pred, p.gold, s);
  CHECK(a.joint == b.joint);
}

TEST_CASE("span matching") {
  const auto s = fixture::metric_schema();
  const std::vector<int> gold = {1, 2, 0, 5, 3};
  CHECK(count_span_matches(gold, gold, s) == Counts{3, 0, 0});
  const std::vector<int> pred = {1, 0, 0, 5, 4};  // PER truncated; dangling I-GPE
  CHECK(count_span_matches(pred, gold, s) == Counts{2, 1, 1});
}

TEST_CASE("metrics stay in [0, 1]") {
  for (long tp = 0; tp < 5; ++tp) {
    for (long fp = 0; fp < 5; ++fp) {
      for (long fn = 0; fn < 5; ++fn) {
        const auto m = metrics({tp, fp, fn});
        for (double x : {m.precision, m.recall, m.f1}) {
          CHECK(x >= 0.0);
          CHECK(x <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("report mean, sample std and CSV layout") {
  EvalReport r;
  FoldResult a, b;
  a.fold = 1;
  a.tokens.joint = {1, 1, 0};  // F1 2/3
  b.fold = 2;
  b.tokens.joint = {1, 0, 0};  // F1 1
  r.folds = {a, b};
  CHECK(r.mean_f1(ReportSide::Joint) == doctest::Approx(5.0 / 6.0));
  CHECK(r.std_f1(ReportSide::Joint) == doctest::Approx(std::sqrt(2.0) * (1.0 / 6.0)));
  const auto csv = r.to_csv();
  CHECK(csv.rfind("fold,side,tp,fp,fn,precision,recall,f1\n", 0) == 0);
  CHECK(csv.find("1,joint,1,1,0,0.500000,1.000000,0.666667\n") != std::string::npos);
  CHECK(count_lines(csv, "mean,") == 4);
  CHECK(count_lines(csv, "std,") == 4);
  CHECK(count_lines(csv, "1,") == 4);
}

TEST_CASE("crossval plumbing") {
  const auto schema = corpus::default_synthetic_schema();
  const auto tiny = corpus::generate_synthetic(schema, 4, 3, corpus::default_profile(schema));
  auto c = tiny_config();
  c.folds = 2;
  const auto r = crossval(tiny, c, ncsl::MatrixMode::MetaPath);
  CHECK(r.folds.size() == 2);
  const auto csv = r.to_csv();
  CHECK(count_lines(csv, "1,") == 4);
  CHECK(count_lines(csv, "2,") == 4);
  CHECK(count_lines(csv, "mean,") == 4);
  CHECK(count_lines(csv, "std,") == 4);
  CHECK_THROWS_AS(crossval(tiny, c, ncsl::MatrixMode::MetaPath, 0), ValidationError);
  c.folds = 5;
  CHECK_THROWS_AS(crossval(tiny, c, ncsl::MatrixMode::MetaPath), ValidationError);
}

TEST_CASE("crossval is deterministic and thread-count independent") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data = corpus::generate_synthetic(schema, 60, 3, corpus::default_profile(schema));
  auto c = tiny_config();
  c.folds = 3;
  const auto a = crossval(data, c, ncsl::MatrixMode::MetaPath, 1).to_csv();
  CHECK(a == crossval(data, c, ncsl::MatrixMode::MetaPath, 1).to_csv());
  CHECK(a == crossval(data, c, ncsl::MatrixMode::MetaPath, 3).to_csv());
}

TEST_CASE("alpha = 0 matches the tagger-only path") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data = corpus::generate_synthetic(schema, 60, 3, corpus::default_profile(schema));
  auto c = tiny_config();
  c.folds = 3;
  c.alpha = 0.0;
  const auto plain = crossval(data, c, ncsl::MatrixMode::None).to_csv();
  CHECK(crossval(data, c, ncsl::MatrixMode::MetaPath).to_csv() == plain);
  CHECK(crossval(data, c, ncsl::MatrixMode::Direct).to_csv() == plain);
}

TEST_CASE("sensitivity sweep grid") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data = corpus::generate_synthetic(schema, 40, 3, corpus::default_profile(schema));
  auto c = tiny_config();
  c.epochs = 1;
  const std::vector<int> l3 = {3}, k10 = {10};
  const auto single = sensitivity_sweep(data, c, l3, k10, ncsl::MatrixMode::MetaPath);
  REQUIRE(single.size() == 1);
  c.folds = 10;
  c.meta_path_length = 3;
  CHECK(single[0].mean_f1_joint ==
        crossval(data, c, ncsl::MatrixMode::MetaPath).mean_f1(ReportSide::Joint));

  const std::vector<int> ls = {1, 3}, ks = {2, 3};
  const auto rows = sensitivity_sweep(data, c, ls, ks, ncsl::MatrixMode::MetaPath);
  CHECK(rows.size() == 4);
  const auto csv = sweep_csv(rows);
  CHECK(csv.rfind("meta_path_length,folds,mean_f1_joint,std_f1_joint,mean_f1_entity,"
                  "mean_f1_trigger\n",
                  0) == 0);
  CHECK(count_lines(csv, "1,2,") == 1);
  CHECK(count_lines(csv, "3,3,") == 1);
  const std::vector<int> even = {2};
  CHECK_THROWS_AS(sensitivity_sweep(data, c, even, ks, ncsl::MatrixMode::MetaPath),
                  ValidationError);
}
