#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csm/corpus.hpp"
#include "csm/ncsl.hpp"
#include "csm/random.hpp"

namespace csm::tagger {

struct TrainConfig {
  double alpha = 0.5;
  int d_emb = 300;
  int d_hid = 128;
  int n_layers = 2;
  double dropout = 0.5;
  double learning_rate = 0.02;
  int epochs = 30;
  int batch_size = 256;
  int meta_path_length = 3;
  int folds = 10;
  std::uint64_t seed = 1;
  ncsl::MatrixMode matrix_mode = ncsl::MatrixMode::MetaPath;

  /// Throws ValidationError on the first violated range.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;

  /// d_emb=32, d_hid=16, one layer, ten epochs.
  static TrainConfig desk_scale();
};

/// Gate blocks are stacked input, forget, cell, output.
struct LstmWeights {
  Eigen::MatrixXd w;     ///< 4h x input
  Eigen::MatrixXd u;     ///< 4h x h
  Eigen::MatrixXd bias;  ///< 4h x 1
};

struct TaggerParams {
  Eigen::MatrixXd embedding;                    ///< |vocab| x d_emb
  std::vector<std::array<LstmWeights, 2>> lstm; ///< [layer][forward, backward]
  Eigen::MatrixXd proj_w;                       ///< 2h x |tags|
  Eigen::MatrixXd proj_b;                       ///< 1 x |tags|

  int vocab_size() const { return static_cast<int>(embedding.rows()); }
  int d_emb() const { return static_cast<int>(embedding.cols()); }
  int d_hid() const { return lstm.empty() ? 0 : static_cast<int>(lstm[0][0].u.cols()); }
  int num_tags() const { return static_cast<int>(proj_w.cols()); }

  /// Uniform in +-1/sqrt(fan_in) per array.
  static TaggerParams init(int vocab_size, int num_tags, const TrainConfig& config,
                           std::uint64_t seed);
  TaggerParams zeros_like() const;

  /// Calls f(name, matrix) for every parameter array in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    f(std::string("embedding"), embedding);
    for (std::size_t l = 0; l < lstm.size(); ++l) {
      for (int d = 0; d < 2; ++d) {
        const std::string p = "lstm." + std::to_string(l) + (d ? ".bwd" : ".fwd");
        f(p + ".w", lstm[l][d].w);
        f(p + ".u", lstm[l][d].u);
        f(p + ".bias", lstm[l][d].bias);
      }
    }
    f(std::string("proj.w"), proj_w);
    f(std::string("proj.b"), proj_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<TaggerParams*>(this)->for_each(
        [&](const std::string& name, Eigen::MatrixXd& m) {
          f(name, static_cast<const Eigen::MatrixXd&>(m));
        });
  }

  bool operator==(const TaggerParams& other) const;
};

enum class Mode { Train, Eval };

/// Per-token tag probabilities, n x |tags|. Dropout (train mode only) draws
/// its masks from `rng`.
Eigen::MatrixXd forward(const TaggerParams& params, std::span<const int> tokens,
                        Mode mode, double dropout, Rng* rng);

/// Mean over tokens of -log p(gold).
double seq_loss(const Eigen::MatrixXd& probs, std::span<const int> gold);

/// Per-token argmax, lowest index on ties.
std::vector<int> argmax_rows(const Eigen::MatrixXd& probs);
std::vector<int> predict_tags(const TaggerParams& params,
                              std::span<const int> tokens);

struct Example {
  std::vector<int> tokens;
  std::vector<int> gold;
};

std::vector<Example> make_examples(const corpus::Corpus& corpus);

struct BatchLoss {
  double seq = 0.0;
  double hin = 0.0;
  double combined = 0.0;
};

/// Loss of L_c = (1 - alpha) L_seq + alpha L_hin for one batch. A null
/// converter means the tagger alone (L_c = L_seq).
struct Objective {
  const corpus::TagSchema* schema = nullptr;
  const ncsl::Converter* converter = nullptr;
  double alpha = 0.0;
  double dropout = 0.0;
};

/// Forward-only evaluation of the batch objective (dropout from `rng` when
/// objective.dropout > 0).
BatchLoss batch_loss(const TaggerParams& params, std::span<const Example> batch,
                     const Objective& objective, Rng& rng);

/// Gradient of the batch objective. Sentences run in parallel in fixed-size
/// chunks; the per-sentence gradients are summed in sentence order so the
/// result does not depend on the thread count. Throws NumericalError naming
/// the first non-finite gradient array.
BatchLoss batch_gradient(const TaggerParams& params, std::span<const Example> batch,
                         const Objective& objective, Rng& rng, TaggerParams& grad);
/// Single-threaded reference for batch_gradient; bitwise identical output.
BatchLoss batch_gradient_serial(const TaggerParams& params,
                                std::span<const Example> batch,
                                const Objective& objective, Rng& rng,
                                TaggerParams& grad);

struct AdamState {
  TaggerParams m;
  TaggerParams v;
  long step = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  static AdamState for_params(const TaggerParams& params);
};

void adam_step(TaggerParams& params, const TaggerParams& grads, AdamState& state,
               double lr);

struct LossRow {
  int epoch = 0;
  int batch = 0;
  BatchLoss loss;
};

struct TrainResult {
  TaggerParams params;
  std::vector<LossRow> log;
};

/// Adam over seeded random batches. `converter` may be null (tagger only).
TrainResult train(const corpus::Corpus& corpus, const TrainConfig& config,
                  const ncsl::Converter* converter);

/// Loss log rows as `epoch,batch,L_seq,L_hin,L_c,alpha,mode`.
std::string loss_log_csv(const std::vector<LossRow>& log, double alpha,
                         ncsl::MatrixMode mode);

}  // namespace csm::tagger
