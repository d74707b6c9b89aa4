#include <cmath>
#include <vector>

#include "csm/tagger.hpp"

namespace csm::tagger {

AdamState AdamState::for_params(const TaggerParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(TaggerParams& params, const TaggerParams& grads, AdamState& state,
               double lr) {
  std::vector<Eigen::MatrixXd*> p, m, v;
  std::vector<const Eigen::MatrixXd*> g;
  params.for_each([&](const std::string&, Eigen::MatrixXd& x) { p.push_back(&x); });
  state.m.for_each([&](const std::string&, Eigen::MatrixXd& x) { m.push_back(&x); });
  state.v.for_each([&](const std::string&, Eigen::MatrixXd& x) { v.push_back(&x); });
  grads.for_each([&](const std::string&, const Eigen::MatrixXd& x) { g.push_back(&x); });
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw ValidationError("adam_step: parameter/gradient layout mismatch");
  }
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k]->rows() != g[k]->rows() || p[k]->cols() != g[k]->cols() ||
        m[k]->rows() != g[k]->rows() || m[k]->cols() != g[k]->cols()) {
      throw ValidationError("adam_step: shape mismatch");
    }
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, double(state.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, double(state.step));
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto mk = m[k]->array();
    auto vk = v[k]->array();
    const auto gk = g[k]->array();
    mk = AdamState::kBeta1 * mk + (1.0 - AdamState::kBeta1) * gk;
    vk = AdamState::kBeta2 * vk + (1.0 - AdamState::kBeta2) * gk.square();
    p[k]->array() -= lr * (mk / c1) / ((vk / c2).sqrt() + AdamState::kEpsilon);
  }
}

}  // namespace csm::tagger
