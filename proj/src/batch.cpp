#include <cmath>
#include <numeric>
#include <sstream>

#include "csm/tagger.hpp"
#include "lstm_internal.hpp"

namespace csm::tagger {

namespace {

// Sentences whose gradients are held at once; also the reduction granule.
constexpr std::size_t kChunk = 16;

struct ForwardPass {
  std::vector<detail::SentenceCache> caches;
  std::vector<Eigen::MatrixXd> probs;
  BatchLoss loss;
  ncsl::HinLoss hin;
  ncsl::SidePair pred;
};

template <bool Parallel>
ForwardPass run_forward(const TaggerParams& params, std::span<const Example> batch,
                        const Objective& obj, Rng& rng) {
  if (batch.empty()) throw ValidationError("batch is empty");
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<std::uint64_t> seeds(batch.size());
  for (auto& s : seeds) s = rng();

  ForwardPass fp;
  fp.caches.resize(batch.size());
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    Rng local(seeds[s]);
    fp.caches[s] = detail::forward_cached(params, batch[s].tokens, obj.dropout, &local);
  }

  fp.probs.reserve(batch.size());
  double seq = 0.0;
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    fp.probs.push_back(fp.caches[s].probs);
    seq += seq_loss(fp.caches[s].probs, batch[s].gold);
  }
  fp.loss.seq = seq / static_cast<double>(batch.size());

  if (obj.converter) {
    std::vector<std::vector<int>> gold;
    gold.reserve(batch.size());
    for (const auto& ex : batch) gold.push_back(ex.gold);
    fp.pred = ncsl::aggregate_predicted(fp.probs, *obj.schema);
    const auto truth = ncsl::aggregate_gold(gold, *obj.schema);
    fp.hin = ncsl::hin_loss(fp.pred.entity, fp.pred.trigger, truth.entity,
                            truth.trigger, *obj.converter);
    fp.loss.hin = fp.hin.value;
    fp.loss.combined = ncsl::combined_loss(fp.loss.seq, fp.loss.hin, obj.alpha);
  } else {
    fp.loss.combined = fp.loss.seq;
  }
  return fp;
}

void check_finite(const TaggerParams& grad) {
  grad.for_each([](const std::string& name, const Eigen::MatrixXd& m) {
    if (!m.allFinite()) {
      throw NumericalError("non-finite gradient in parameter array '" + name + "'");
    }
  });
}

template <bool Parallel>
BatchLoss gradient_impl(const TaggerParams& params, std::span<const Example> batch,
                        const Objective& obj, Rng& rng, TaggerParams& grad) {
  ForwardPass fp = run_forward<Parallel>(params, batch, obj, rng);
  const double alpha = obj.converter ? obj.alpha : 0.0;
  const double batch_size = static_cast<double>(batch.size());

  std::vector<Eigen::MatrixXd> d_probs;
  if (obj.converter) {
    d_probs = ncsl::aggregate_predicted_vjp(fp.probs, *obj.schema,
                                            fp.hin.d_pred_entity,
                                            fp.hin.d_pred_trigger);
  }

  auto d_logits = [&](std::size_t s) {
    const Eigen::MatrixXd& p = fp.probs[s];
    const auto& gold = batch[s].gold;
    const double w = (1.0 - alpha) / (batch_size * static_cast<double>(gold.size()));
    Eigen::MatrixXd d = p;
    for (std::size_t t = 0; t < gold.size(); ++t) d(t, gold[t]) -= 1.0;
    d *= w;
    if (obj.converter) {
      // softmax vector-Jacobian product, row by row
      const Eigen::MatrixXd& g = d_probs[s];
      const Eigen::VectorXd dots = (g.cwiseProduct(p)).rowwise().sum();
      const Eigen::MatrixXd soft =
          p.cwiseProduct(g - dots.replicate(1, g.cols()));
      d += alpha * soft;
    }
    return d;
  };

  grad = params.zeros_like();
  std::vector<detail::SentenceGrad> partial(std::min(kChunk, batch.size()));
  for (std::size_t start = 0; start < batch.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, batch.size() - start);
    const auto m = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) if (Parallel)
    for (std::ptrdiff_t k = 0; k < m; ++k) {
      const std::size_t s = start + static_cast<std::size_t>(k);
      partial[k] = detail::empty_grad(params);
      detail::backward_cached(params, fp.caches[s], d_logits(s), partial[k]);
    }
    for (std::size_t k = 0; k < count; ++k) {
      auto& pg = partial[k];
      for (std::size_t l = 0; l < grad.lstm.size(); ++l) {
        for (int d = 0; d < 2; ++d) {
          grad.lstm[l][d].w += pg.dense.lstm[l][d].w;
          grad.lstm[l][d].u += pg.dense.lstm[l][d].u;
          grad.lstm[l][d].bias += pg.dense.lstm[l][d].bias;
        }
      }
      grad.proj_w += pg.dense.proj_w;
      grad.proj_b += pg.dense.proj_b;
      for (const auto& [id, row] : pg.embedding_rows) grad.embedding.row(id) += row;
    }
  }
  check_finite(grad);
  return fp.loss;
}

}  // namespace

BatchLoss batch_loss(const TaggerParams& params, std::span<const Example> batch,
                     const Objective& objective, Rng& rng) {
  return run_forward<true>(params, batch, objective, rng).loss;
}

BatchLoss batch_gradient(const TaggerParams& params, std::span<const Example> batch,
                         const Objective& objective, Rng& rng, TaggerParams& grad) {
  return gradient_impl<true>(params, batch, objective, rng, grad);
}

BatchLoss batch_gradient_serial(const TaggerParams& params,
                                std::span<const Example> batch,
                                const Objective& objective, Rng& rng,
                                TaggerParams& grad) {
  return gradient_impl<false>(params, batch, objective, rng, grad);
}

TrainResult train(const corpus::Corpus& corpus, const TrainConfig& config,
                  const ncsl::Converter* converter) {
  config.validate();
  if (corpus.size() == 0) throw ValidationError("train: empty training corpus");
  TrainResult result;
  result.params = TaggerParams::init(corpus.vocab.size(), corpus.schema.num_tags(),
                                     config, mix_seed(config.seed, 1));
  AdamState adam = AdamState::for_params(result.params);
  Rng rng(mix_seed(config.seed, 2));

  const std::vector<Example> examples = make_examples(corpus);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  Objective obj;
  obj.schema = &corpus.schema;
  obj.converter = converter;
  obj.alpha = config.alpha;
  obj.dropout = config.dropout;

  TaggerParams grad;
  std::vector<Example> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(std::span(order), rng);
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(examples[order[k]]);
      const BatchLoss loss = batch_gradient(result.params, batch, obj, rng, grad);
      adam_step(result.params, grad, adam, config.learning_rate);
      result.log.push_back({epoch, ++batch_index, loss});
    }
  }
  return result;
}

std::string loss_log_csv(const std::vector<LossRow>& log, double alpha,
                         ncsl::MatrixMode mode) {
  std::ostringstream out;
  out << "epoch,batch,L_seq,L_hin,L_c,alpha,mode\n";
  const std::string mode_name = ncsl::to_string(mode);
  for (const auto& row : log) {
    out << row.epoch << ',' << row.batch << ',' << hin::format_double(row.loss.seq)
        << ',' << hin::format_double(row.loss.hin) << ','
        << hin::format_double(row.loss.combined) << ',' << hin::format_double(alpha)
        << ',' << mode_name << '\n';
  }
  return out.str();
}

}  // namespace csm::tagger
