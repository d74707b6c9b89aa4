#include <cmath>
#include <numeric>

#include "csm/hin.hpp"
#include "csm/tagger.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace csm;
using tagger::TaggerParams;
using tagger::TrainConfig;

namespace {

TrainConfig toy_config(int layers = 1) {
  TrainConfig c;
  c.d_emb = 8;
  c.d_hid = 8;
  c.n_layers = layers;
  c.dropout = 0.0;
  return c;
}

struct Toy {
  corpus::Corpus data;
  std::vector<tagger::Example> batch;
  hin::MetaPathMatrix matrices;
};

// Four sentences over a vocab of exactly 20 (unknown + 19 tokens).
Toy toy_fixture() {
  Toy t;
  const auto schema = corpus::default_synthetic_schema();
  auto data = corpus::generate_synthetic(schema, 200, 3, corpus::default_profile(schema));
  t.data.schema = schema;
  for (const auto& s : data.sentences) {
    t.data.sentences.push_back(s);
    const auto v = corpus::build_vocab(t.data.sentences);
    if (v.size() > 20) {
      t.data.sentences.pop_back();
      continue;
    }
    if (t.data.sentences.size() == 4) break;
  }
  t.data.vocab = corpus::build_vocab(t.data.sentences);
  // Pad the vocab to 20 entries with unused tokens.
  for (int k = 0; t.data.vocab.size() < 20; ++k) t.data.vocab.add("pad" + std::to_string(k));
  t.batch = tagger::make_examples(t.data);
  const auto graph = hin::build_hin(data);
  t.matrices = hin::build_matrices(graph, 3);
  return t;
}

}  // namespace

TEST_CASE("forward rows are distributions in both modes") {
  auto c = toy_config(2);
  c.dropout = 0.5;
  const auto p = TaggerParams::init(20, 11, c, 9);
  std::vector<int> sentence = {1, 5, 7, 19, 3};
  Rng rng(4);
  for (auto mode : {tagger::Mode::Eval, tagger::Mode::Train}) {
    const auto probs = tagger::forward(p, sentence, mode, c.dropout, &rng);
    REQUIRE(probs.rows() == 5);
    REQUIRE(probs.cols() == 11);
    CHECK((probs.array() >= 0.0).all());
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      CHECK(std::abs(probs.row(r).sum() - 1.0) <= 1e-6);
    }
  }
  const std::vector<int> one = {2};
  CHECK(tagger::forward(p, one, tagger::Mode::Eval, 0.0, nullptr).rows() == 1);
}

TEST_CASE("eval forward is deterministic; train forward depends on the mask") {
  auto c = toy_config();
  c.dropout = 0.5;
  const auto p = TaggerParams::init(20, 11, c, 9);
  const std::vector<int> s = {1, 2, 3, 4, 5, 6};
  CHECK(tagger::forward(p, s, tagger::Mode::Eval, 0.5, nullptr) ==
        tagger::forward(p, s, tagger::Mode::Eval, 0.5, nullptr));
  Rng a(1), b(1), d(2);
  const auto ta = tagger::forward(p, s, tagger::Mode::Train, 0.5, &a);
  CHECK(ta == tagger::forward(p, s, tagger::Mode::Train, 0.5, &b));
  CHECK(ta != tagger::forward(p, s, tagger::Mode::Train, 0.5, &d));
}

TEST_CASE("forward rejects out-of-range token indices") {
  const auto p = TaggerParams::init(20, 11, toy_config(), 1);
  const std::vector<int> bad = {3, 20};
  CHECK_THROWS_AS(tagger::forward(p, bad, tagger::Mode::Eval, 0.0, nullptr),
                  ValidationError);
}

TEST_CASE("seq_loss closed forms") {
  Eigen::MatrixXd certain = Eigen::MatrixXd::Zero(2, 3);
  certain(0, 1) = 1.0;
  certain(1, 2) = 1.0;
  const std::vector<int> gold = {1, 2};
  CHECK(tagger::seq_loss(certain, gold) == 0.0);

  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(3, 5, 0.2);
  const std::vector<int> g3 = {0, 4, 2};
  CHECK(tagger::seq_loss(uniform, g3) == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  Eigen::MatrixXd two(2, 2);
  two << 0.5, 0.5, 0.75, 0.25;
  const std::vector<int> g2 = {0, 1};
  CHECK(tagger::seq_loss(two, g2) ==
        doctest::Approx((std::log(2.0) + std::log(4.0)) / 2).epsilon(1e-12));

  const std::vector<int> out_of_range = {0, 2};
  CHECK_THROWS_AS(tagger::seq_loss(two, out_of_range), ValidationError);
}

TEST_CASE("argmax breaks ties toward the lowest tag") {
  Eigen::MatrixXd p(2, 3);
  p << 0.1, 0.7, 0.2, 0.4, 0.2, 0.4;
  CHECK(tagger::argmax_rows(p) == std::vector<int>{1, 0});
}

TEST_CASE("projection bias gradient equals mean softmax minus one-hot") {
  const auto t = toy_fixture();
  auto p = TaggerParams::init(20, t.data.schema.num_tags(), toy_config(), 5);
  p.proj_w.setZero();
  p.proj_b.setZero();
  tagger::Objective obj{&t.data.schema, nullptr, 0.0, 0.0};
  Rng rng(0);
  TaggerParams grad;
  tagger::batch_gradient(p, t.batch, obj, rng, grad);
  // Logits are all zero, so every row is uniform.
  const double k = t.data.schema.num_tags();
  Eigen::RowVectorXd expected = Eigen::RowVectorXd::Zero(t.data.schema.num_tags());
  for (const auto& ex : t.batch) {
    for (int g : ex.gold) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(expected.size(), 1.0 / k);
      row[g] -= 1.0;
      expected += row / double(ex.gold.size());
    }
  }
  expected /= double(t.batch.size());
  CHECK((grad.proj_b.row(0) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("alpha = 0 reproduces the pure sequence-labeling gradient") {
  const auto t = toy_fixture();
  const auto p = TaggerParams::init(20, t.data.schema.num_tags(), toy_config(), 6);
  const ncsl::Converter conv(ncsl::MatrixMode::MetaPath, t.matrices);
  TaggerParams with, without;
  Rng r1(3), r2(3);
  tagger::batch_gradient(p, t.batch, {&t.data.schema, &conv, 0.0, 0.0}, r1, with);
  tagger::batch_gradient(p, t.batch, {&t.data.schema, nullptr, 0.0, 0.0}, r2, without);
  CHECK(with == without);
}

TEST_CASE("full-model gradient matches central differences") {
  const auto t = toy_fixture();
  for (int layers : {1, 2}) {
    const auto p = TaggerParams::init(20, t.data.schema.num_tags(), toy_config(layers), 7);
    for (auto mode : {ncsl::MatrixMode::Direct, ncsl::MatrixMode::MetaPath}) {
      const ncsl::Converter conv(mode, t.matrices);
      for (double alpha : {0.0, 0.5, 1.0}) {
        CAPTURE(layers);
        CAPTURE(alpha);
        CAPTURE(ncsl::to_string(mode));
        const tagger::Objective obj{&t.data.schema, &conv, alpha, 0.0};
        double worst = 0.0;
        for (const auto& c : oracle::check_gradients(p, t.batch, obj, 5, 1e-4, 11)) {
          if (c.error > worst) worst = c.error;
          CHECK_MESSAGE(c.error <= 1e-4, c.array, " (", c.row, ",", c.col, ") analytic ",
                        c.analytic, " numeric ", c.numeric);
        }
        MESSAGE("worst relative error ", worst);
      }
    }
  }
}

TEST_CASE("parallel and serial batch gradients are bitwise identical") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data =
      corpus::generate_synthetic(schema, 40, 8, corpus::default_profile(schema));
  auto c = toy_config(2);
  c.dropout = 0.3;
  const auto p = TaggerParams::init(data.vocab.size(), schema.num_tags(), c, 2);
  const auto examples = tagger::make_examples(data);
  const auto mats = hin::build_matrices(hin::build_hin(data), 3);
  const ncsl::Converter conv(ncsl::MatrixMode::MetaPath, mats);
  const tagger::Objective obj{&schema, &conv, 0.5, c.dropout};
  TaggerParams a, b;
  Rng r1(17), r2(17);
  const auto la = tagger::batch_gradient(p, examples, obj, r1, a);
  const auto lb = tagger::batch_gradient_serial(p, examples, obj, r2, b);
  CHECK(a == b);
  CHECK(la.combined == lb.combined);
}

TEST_CASE("non-finite gradients abort with the array name") {
  const auto t = toy_fixture();
  auto p = TaggerParams::init(20, t.data.schema.num_tags(), toy_config(), 6);
  p.proj_w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Rng rng(0);
  TaggerParams grad;
  try {
    tagger::batch_gradient(p, t.batch, {&t.data.schema, nullptr, 0.0, 0.0}, rng, grad);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("'") != std::string::npos);
  }
}

TEST_CASE("adam step closed forms") {
  const auto p0 = TaggerParams::init(5, 3, toy_config(), 1);
  SUBCASE("zero gradient leaves parameters unchanged") {
    auto p = p0;
    auto state = tagger::AdamState::for_params(p);
    tagger::adam_step(p, p.zeros_like(), state, 0.02);
    CHECK(p == p0);
    CHECK(state.step == 1);
  }
  SUBCASE("first step moves by lr * g / (|g| + eps)") {
    auto p = p0;
    auto g = p.zeros_like();
    g.proj_b(0, 0) = 0.3;
    g.proj_b(0, 1) = -2.0;
    auto state = tagger::AdamState::for_params(p);
    tagger::adam_step(p, g, state, 0.02);
    CHECK(p.proj_b(0, 0) - p0.proj_b(0, 0) ==
          doctest::Approx(-0.02 * 0.3 / (0.3 + 1e-8)).epsilon(1e-12));
    CHECK(p.proj_b(0, 1) - p0.proj_b(0, 1) ==
          doctest::Approx(0.02 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
    CHECK(p.proj_b(0, 2) == p0.proj_b(0, 2));
  }
  SUBCASE("identical calls from identical state agree") {
    auto pa = p0, pb = p0;
    auto g = p0;  // any non-trivial gradient
    auto sa = tagger::AdamState::for_params(p0), sb = sa;
    tagger::adam_step(pa, g, sa, 0.01);
    tagger::adam_step(pb, g, sb, 0.01);
    CHECK(pa == pb);
  }
}

TEST_CASE("training loss decreases over the first epochs") {
  const auto schema = corpus::default_synthetic_schema();
  const auto data =
      corpus::generate_synthetic(schema, 500, 21, corpus::default_profile(schema));
  auto c = TrainConfig::desk_scale();
  c.epochs = 5;
  c.alpha = 0.0;
  int decreasing = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const auto r = tagger::train(data, c, nullptr);
    const auto epoch_mean = [&](int epoch) {
      double sum = 0.0;
      int n = 0;
      for (const auto& row : r.log) {
        if (row.epoch == epoch) {
          sum += row.loss.seq;
          ++n;
        }
      }
      return sum / n;
    };
    decreasing += epoch_mean(5) < epoch_mean(1);
  }
  CHECK(decreasing >= 4);
}
