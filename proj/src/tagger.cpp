#include <cmath>

#include "csm/tagger.hpp"
#include "lstm_internal.hpp"

namespace csm::tagger {

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0, 1]");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be positive");
  }
  if (d_emb < 1 || d_hid < 1 || n_layers < 1 || epochs < 1 || batch_size < 1 ||
      folds < 1) {
    fail("size fields must be at least 1");
  }
  if (meta_path_length < 1 || meta_path_length % 2 == 0) {
    fail("meta_path_length must be odd and positive");
  }
}

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.d_emb = 32;
  c.d_hid = 16;
  c.n_layers = 1;
  c.epochs = 10;
  return c;
}

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound,
                               Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform(rng, -bound, bound);
  }
  return m;
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p,
                             Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform01(rng) < p ? 0.0 : keep;
  }
  return m;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const Eigen::ArrayXd e =
        (logits.row(r).array() - logits.row(r).maxCoeff()).exp().transpose();
    out.row(r) = (e / e.sum()).transpose();
  }
  return out;
}

detail::DirectionCache run_direction(const LstmWeights& p, Eigen::MatrixXd x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index h = p.u.cols();
  detail::DirectionCache c;
  const Eigen::MatrixXd z_in =
      (x * p.w.transpose()).rowwise() + p.bias.col(0).transpose();
  c.x = std::move(x);
  c.i.resize(n, h);
  c.f.resize(n, h);
  c.g.resize(n, h);
  c.o.resize(n, h);
  c.c.resize(n, h);
  c.h.resize(n, h);
  Eigen::RowVectorXd h_prev = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd c_prev = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::RowVectorXd z = z_in.row(t) + h_prev * p.u.transpose();
    c.i.row(t) = sigmoid(z.segment(0, h).array()).matrix();
    c.f.row(t) = sigmoid(z.segment(h, h).array()).matrix();
    c.g.row(t) = z.segment(2 * h, h).array().tanh().matrix();
    c.o.row(t) = sigmoid(z.segment(3 * h, h).array()).matrix();
    c.c.row(t) = c.f.row(t).cwiseProduct(c_prev) + c.i.row(t).cwiseProduct(c.g.row(t));
    c.h.row(t) = c.o.row(t).cwiseProduct(c.c.row(t).array().tanh().matrix());
    h_prev = c.h.row(t);
    c_prev = c.c.row(t);
  }
  return c;
}

// Returns d(input) in processing order; accumulates weight gradients.
Eigen::MatrixXd back_direction(const LstmWeights& p, const detail::DirectionCache& c,
                               const Eigen::MatrixXd& d_h_out, LstmWeights& g) {
  const Eigen::Index n = c.x.rows();
  const Eigen::Index h = p.u.cols();
  Eigen::MatrixXd d_z(n, 4 * h);
  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const Eigen::ArrayXXd dh = (d_h_out.row(t) + dh_next).array();
    const Eigen::ArrayXXd tc = c.c.row(t).array().tanh();
    const Eigen::ArrayXXd i = c.i.row(t).array(), f = c.f.row(t).array(),
                          gg = c.g.row(t).array(), o = c.o.row(t).array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    const Eigen::ArrayXXd c_prev =
        t > 0 ? Eigen::ArrayXXd(c.c.row(t - 1).array())
              : Eigen::ArrayXXd::Zero(1, h);
    d_z.block(t, 0, 1, h) = (dc * gg * i * (1.0 - i)).matrix();
    d_z.block(t, h, 1, h) = (dc * c_prev * f * (1.0 - f)).matrix();
    d_z.block(t, 2 * h, 1, h) = (dc * i * (1.0 - gg.square())).matrix();
    d_z.block(t, 3 * h, 1, h) = (dh * tc * o * (1.0 - o)).matrix();
    dc_next = (dc * f).matrix();
    dh_next = d_z.row(t) * p.u;
    if (t > 0) g.u.noalias() += d_z.row(t).transpose() * c.h.row(t - 1);
  }
  g.w.noalias() += d_z.transpose() * c.x;
  g.bias.col(0) += d_z.colwise().sum().transpose();
  return d_z * p.w;
}

}  // namespace

TaggerParams TaggerParams::init(int vocab_size, int num_tags,
                                const TrainConfig& config, std::uint64_t seed) {
  if (vocab_size < 1 || num_tags < 1) {
    throw ValidationError("TaggerParams::init: empty vocab or tag set");
  }
  Rng rng(seed);
  TaggerParams p;
  const int h = config.d_hid;
  p.embedding = uniform_matrix(vocab_size, config.d_emb,
                               1.0 / std::sqrt(double(config.d_emb)), rng);
  for (int l = 0; l < config.n_layers; ++l) {
    const int in = l == 0 ? config.d_emb : 2 * h;
    auto& layer = p.lstm.emplace_back();
    for (auto& d : layer) {
      d.w = uniform_matrix(4 * h, in, 1.0 / std::sqrt(double(in)), rng);
      d.u = uniform_matrix(4 * h, h, 1.0 / std::sqrt(double(h)), rng);
      d.bias = uniform_matrix(4 * h, 1, 1.0 / std::sqrt(double(h)), rng);
    }
  }
  p.proj_w = uniform_matrix(2 * h, num_tags, 1.0 / std::sqrt(2.0 * h), rng);
  p.proj_b = uniform_matrix(1, num_tags, 1.0 / std::sqrt(2.0 * h), rng);
  return p;
}

TaggerParams TaggerParams::zeros_like() const {
  TaggerParams z = *this;
  z.for_each([](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
  return z;
}

bool TaggerParams::operator==(const TaggerParams& other) const {
  std::vector<const Eigen::MatrixXd*> mine, theirs;
  for_each([&](const std::string&, const Eigen::MatrixXd& m) { mine.push_back(&m); });
  other.for_each(
      [&](const std::string&, const Eigen::MatrixXd& m) { theirs.push_back(&m); });
  if (mine.size() != theirs.size()) return false;
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (mine[k]->rows() != theirs[k]->rows() || mine[k]->cols() != theirs[k]->cols() ||
        *mine[k] != *theirs[k]) {
      return false;
    }
  }
  return true;
}

namespace detail {

SentenceCache forward_cached(const TaggerParams& params, std::span<const int> tokens,
                             double dropout, Rng* rng) {
  const Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
  if (n == 0) throw ValidationError("forward: empty sentence");
  const bool drop = dropout > 0.0 && rng != nullptr;
  SentenceCache cache;
  cache.tokens.assign(tokens.begin(), tokens.end());

  Eigen::MatrixXd x(n, params.d_emb());
  for (Eigen::Index t = 0; t < n; ++t) {
    const int id = tokens[t];
    if (id < 0 || id >= params.vocab_size()) {
      throw ValidationError("forward: token index " + std::to_string(id) +
                            " outside vocab of size " +
                            std::to_string(params.vocab_size()));
    }
    x.row(t) = params.embedding.row(id);
  }

  for (const auto& layer : params.lstm) {
    LayerCache lc;
    if (drop) {
      lc.mask = dropout_mask(n, x.cols(), dropout, *rng);
      x = x.cwiseProduct(lc.mask);
    }
    lc.input = x;
    lc.dir[0] = run_direction(layer[0], x);
    lc.dir[1] = run_direction(layer[1], x.colwise().reverse());
    const Eigen::Index h = layer[0].u.cols();
    lc.out.resize(n, 2 * h);
    lc.out.leftCols(h) = lc.dir[0].h;
    lc.out.rightCols(h) = lc.dir[1].h.colwise().reverse();
    x = lc.out;
    cache.layers.push_back(std::move(lc));
  }

  if (drop) {
    cache.proj_mask = dropout_mask(n, x.cols(), dropout, *rng);
    x = x.cwiseProduct(cache.proj_mask);
  }
  cache.proj_in = x;
  const Eigen::MatrixXd logits =
      (x * params.proj_w).rowwise() + params.proj_b.row(0);
  cache.probs = softmax_rows(logits);
  return cache;
}

SentenceGrad empty_grad(const TaggerParams& params) {
  SentenceGrad g;
  g.dense.lstm = params.lstm;
  for (auto& layer : g.dense.lstm) {
    for (auto& d : layer) {
      d.w.setZero();
      d.u.setZero();
      d.bias.setZero();
    }
  }
  g.dense.proj_w = Eigen::MatrixXd::Zero(params.proj_w.rows(), params.proj_w.cols());
  g.dense.proj_b = Eigen::MatrixXd::Zero(1, params.proj_b.cols());
  return g;
}

void backward_cached(const TaggerParams& params, const SentenceCache& cache,
                     const Eigen::MatrixXd& d_logits, SentenceGrad& out) {
  out.dense.proj_w.noalias() += cache.proj_in.transpose() * d_logits;
  out.dense.proj_b += d_logits.colwise().sum();
  Eigen::MatrixXd d_x = d_logits * params.proj_w.transpose();
  if (cache.proj_mask.size()) d_x = d_x.cwiseProduct(cache.proj_mask);

  for (std::size_t l = cache.layers.size(); l-- > 0;) {
    const auto& lc = cache.layers[l];
    const auto& layer = params.lstm[l];
    auto& g = out.dense.lstm[l];
    const Eigen::Index h = layer[0].u.cols();
    const Eigen::MatrixXd d_fwd = d_x.leftCols(h);
    const Eigen::MatrixXd d_bwd = d_x.rightCols(h).colwise().reverse();
    Eigen::MatrixXd d_in = back_direction(layer[0], lc.dir[0], d_fwd, g[0]);
    d_in += back_direction(layer[1], lc.dir[1], d_bwd, g[1]).colwise().reverse();
    if (lc.mask.size()) d_in = d_in.cwiseProduct(lc.mask);
    d_x = std::move(d_in);
  }

  for (std::size_t t = 0; t < cache.tokens.size(); ++t) {
    out.embedding_rows.emplace_back(cache.tokens[t], d_x.row(t));
  }
}

}  // namespace detail

Eigen::MatrixXd forward(const TaggerParams& params, std::span<const int> tokens,
                        Mode mode, double dropout, Rng* rng) {
  return detail::forward_cached(params, tokens, mode == Mode::Train ? dropout : 0.0,
                                rng)
      .probs;
}

double seq_loss(const Eigen::MatrixXd& probs, std::span<const int> gold) {
  if (probs.rows() != static_cast<Eigen::Index>(gold.size())) {
    throw ValidationError("seq_loss: " + std::to_string(probs.rows()) +
                          " probability rows for " + std::to_string(gold.size()) +
                          " gold tags");
  }
  if (gold.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] < 0 || gold[t] >= probs.cols()) {
      throw ValidationError("seq_loss: gold tag index out of range");
    }
    total -= std::log(probs(static_cast<Eigen::Index>(t), gold[t]));
  }
  return total / static_cast<double>(gold.size());
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& probs) {
  std::vector<int> out(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict_tags(const TaggerParams& params,
                              std::span<const int> tokens) {
  return argmax_rows(forward(params, tokens, Mode::Eval, 0.0, nullptr));
}

std::vector<Example> make_examples(const corpus::Corpus& corpus) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.push_back({corpus.encode(i), corpus.sentences[i].tags});
  }
  return out;
}

}  // namespace csm::tagger
