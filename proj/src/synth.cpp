#include <cctype>

#include "csm/corpus.hpp"
#include "csm/random.hpp"
#include "json.hpp"

namespace csm::corpus {

namespace {

constexpr int kEntityWords = 6;
constexpr int kTriggerWords = 3;
constexpr int kSharedEntityWords = 4;
constexpr int kSharedTriggerWords = 2;
constexpr int kFillerWords = 40;
constexpr double kSharedEntityRate = 0.3;
constexpr double kSharedTriggerRate = 0.2;
constexpr double kTwoTokenEntityRate = 0.3;

std::string stem(const std::string& type_name) {
  std::string out;
  for (unsigned char c : type_name) {
    if (std::isalnum(c)) out += static_cast<char>(std::tolower(c));
  }
  return out.empty() ? "t" : out;
}

struct Lexicon {
  std::vector<std::vector<std::string>> entity;
  std::vector<std::vector<std::string>> trigger;
  std::vector<std::string> shared_entity;
  std::vector<std::string> shared_trigger;
  std::vector<std::string> filler;

  explicit Lexicon(const TagSchema& schema) {
    for (int e = 0; e < schema.num_entity_types(); ++e) {
      auto& words = entity.emplace_back();
      const auto s = stem(schema.entity_types()[e]);
      for (int k = 0; k < kEntityWords; ++k) {
        words.push_back(s + "_e" + std::to_string(e) + "_" + std::to_string(k));
      }
    }
    for (int t = 0; t < schema.num_trigger_types(); ++t) {
      auto& words = trigger.emplace_back();
      const auto s = stem(schema.trigger_types()[t]);
      for (int k = 0; k < kTriggerWords; ++k) {
        words.push_back(s + "_t" + std::to_string(t) + "_" + std::to_string(k));
      }
    }
    for (int k = 0; k < kSharedEntityWords; ++k) {
      shared_entity.push_back("them" + std::to_string(k));
    }
    for (int k = 0; k < kSharedTriggerWords; ++k) {
      shared_trigger.push_back("did" + std::to_string(k));
    }
    for (int k = 0; k < kFillerWords; ++k) {
      filler.push_back("w" + std::to_string(k));
    }
  }
};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[uniform_below(rng, items.size())];
}

}  // namespace

TagSchema default_synthetic_schema() {
  return TagSchema({"PER", "GPE", "ORG", "WEA", "LOC"},
                   {"Movement", "Conflict", "Transaction"});
}

CooccurrenceProfile default_profile(const TagSchema& schema) {
  CooccurrenceProfile profile;
  const int ne = schema.num_entity_types();
  for (int t = 0; t < schema.num_trigger_types(); ++t) {
    std::vector<double> w(ne, ne > 2 ? 0.1 / (ne - 2) : 0.0);
    const int a = (2 * t) % ne;
    const int b = (2 * t + 1) % ne;
    w[a] = 0.45;
    w[b] += 0.45;
    profile[schema.trigger_types()[t]] = std::move(w);
  }
  return profile;
}

CooccurrenceProfile profile_from_json(std::string_view text,
                                      const TagSchema& schema) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("profile: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("profile: expected a JSON object");
  CooccurrenceProfile profile;
  for (const auto& [trigger, weights] : j.items()) {
    if (schema.trigger_index(trigger) < 0) {
      throw ValidationError("profile: unknown trigger type '" + trigger + "'");
    }
    if (!weights.is_object()) {
      throw ValidationError("profile: weights for '" + trigger +
                            "' must be an object keyed by entity type");
    }
    std::vector<double> w(schema.num_entity_types(), 0.0);
    for (const auto& [entity, value] : weights.items()) {
      const int e = schema.entity_index(entity);
      if (e < 0) {
        throw ValidationError("profile: unknown entity type '" + entity + "'");
      }
      if (!value.is_number()) {
        throw ValidationError("profile: non-numeric weight for '" + entity + "'");
      }
      w[e] = value.get<double>();
    }
    profile[trigger] = std::move(w);
  }
  return profile;
}

Corpus generate_synthetic(const TagSchema& schema, int n_sentences,
                          std::uint64_t seed,
                          const CooccurrenceProfile& profile) {
  if (schema.empty()) throw ValidationError("generate_synthetic: empty schema");
  if (n_sentences < 0) {
    throw ValidationError("generate_synthetic: negative sentence count");
  }
  std::vector<std::vector<double>> weights;
  for (const auto& trigger : schema.trigger_types()) {
    auto it = profile.find(trigger);
    if (it == profile.end()) {
      throw ValidationError("generate_synthetic: profile lacks trigger type '" +
                            trigger + "'");
    }
    const auto& w = it->second;
    if (static_cast<int>(w.size()) != schema.num_entity_types()) {
      throw ValidationError("generate_synthetic: profile for '" + trigger +
                            "' has the wrong number of weights");
    }
    bool positive = false;
    for (double x : w) {
      if (!(x >= 0.0)) {
        throw ValidationError("generate_synthetic: negative weight for '" +
                              trigger + "'");
      }
      positive = positive || x > 0.0;
    }
    if (!positive) {
      throw ValidationError("generate_synthetic: no positive weight for '" +
                            trigger + "'");
    }
    weights.push_back(w);
  }

  const Lexicon lex(schema);
  Rng rng(seed);
  Corpus corpus;
  corpus.schema = schema;
  corpus.sentences.reserve(n_sentences);

  auto add_filler = [&](AnnotatedSentence& s, int max_count) {
    const auto n = uniform_below(rng, max_count + 1);
    for (std::uint64_t k = 0; k < n; ++k) {
      s.tokens.push_back(pick(lex.filler, rng));
      s.tags.push_back(TagSchema::kOutside);
    }
  };

  for (int i = 0; i < n_sentences; ++i) {
    const int trigger = static_cast<int>(
        uniform_below(rng, schema.num_trigger_types()));
    const int n_entities = 1 + static_cast<int>(uniform_below(rng, 3));
    const int trigger_slot = static_cast<int>(uniform_below(rng, n_entities + 1));

    AnnotatedSentence s;
    add_filler(s, 2);
    for (int slot = 0; slot <= n_entities; ++slot) {
      if (slot == trigger_slot) {
        const bool shared = uniform01(rng) < kSharedTriggerRate;
        s.tokens.push_back(shared ? pick(lex.shared_trigger, rng)
                                  : pick(lex.trigger[trigger], rng));
        s.tags.push_back(schema.begin_tag(Role::Trigger, trigger));
      } else {
        const int type = static_cast<int>(sample_weighted(weights[trigger], rng));
        const int begin = schema.begin_tag(Role::Entity, type);
        if (uniform01(rng) < kSharedEntityRate) {
          s.tokens.push_back(pick(lex.shared_entity, rng));
          s.tags.push_back(begin);
        } else {
          s.tokens.push_back(pick(lex.entity[type], rng));
          s.tags.push_back(begin);
          if (uniform01(rng) < kTwoTokenEntityRate) {
            s.tokens.push_back(pick(lex.entity[type], rng));
            s.tags.push_back(begin + 1);
          }
        }
      }
      add_filler(s, 2);
    }
    corpus.sentences.push_back(std::move(s));
  }
  corpus.vocab = build_vocab(corpus.sentences);
  return corpus;
}

}  // namespace csm::corpus
