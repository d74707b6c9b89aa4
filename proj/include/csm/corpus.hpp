#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csm/schema.hpp"

namespace csm::corpus {

/// A maximal B/I run of one role and type, [begin, end).
struct Span {
  int begin = 0;
  int end = 0;
  Role role = Role::Outside;
  int type = -1;
  std::string text;

  bool operator==(const Span&) const = default;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<int> tags;

  std::size_t size() const { return tokens.size(); }
};

/// Spans of the given role, in order of appearance.
std::vector<Span> extract_spans(const AnnotatedSentence& sentence,
                                const TagSchema& schema, Role role);
inline std::vector<Span> gold_entities(const AnnotatedSentence& s,
                                       const TagSchema& schema) {
  return extract_spans(s, schema, Role::Entity);
}
inline std::vector<Span> gold_triggers(const AnnotatedSentence& s,
                                       const TagSchema& schema) {
  return extract_spans(s, schema, Role::Trigger);
}

/// Returns the offending position, or -1 when the tag sequence is BIO-valid.
int first_bio_violation(const std::vector<int>& tags, const TagSchema& schema);

/// Token -> index map. Index 0 is the reserved unknown token and is never
/// produced by a lookup hit.
class Vocab {
 public:
  static constexpr int kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocab() : tokens_{std::string(kUnknownToken)} {}

  /// Adds in first-seen order; returns the index.
  int add(const std::string& token);
  int lookup(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static Vocab from_tokens(const std::vector<std::string>& tokens);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Corpus {
  TagSchema schema;
  std::vector<AnnotatedSentence> sentences;
  Vocab vocab;

  std::size_t size() const { return sentences.size(); }
  /// Token indices of sentence i under this corpus' vocab.
  std::vector<int> encode(std::size_t i) const;
};

Vocab build_vocab(const std::vector<AnnotatedSentence>& sentences);

/// Parses `token<TAB>tag` lines; blank lines separate sentences.
/// Throws ValidationError naming the 1-based line number on malformed lines,
/// unknown tags and BIO violations.
Corpus parse_corpus(std::istream& in, const TagSchema& schema);
Corpus parse_corpus(std::string_view text, const TagSchema& schema);
Corpus load_corpus(const std::string& path, const TagSchema& schema);

/// Canonical text form: every sentence followed by one empty line.
std::string serialize(const Corpus& corpus);

struct Fold {
  Corpus train;
  Corpus test;
};

/// k disjoint folds of a seeded shuffle. Both halves of every fold carry the
/// vocab of the training half.
std::vector<Fold> kfold_split(const Corpus& corpus, int k, std::uint64_t seed);

/// Trigger type name -> weights over entity types (aligned with
/// schema.entity_types()).
using CooccurrenceProfile = std::map<std::string, std::vector<double>>;

/// Profile used by the synthetic harness when none is given: every trigger
/// type concentrates on a distinct pair of entity types.
CooccurrenceProfile default_profile(const TagSchema& schema);
CooccurrenceProfile profile_from_json(std::string_view text,
                                      const TagSchema& schema);

/// Synthetic corpus with one trigger span and 1-3 entity spans per sentence,
/// entity types drawn from the trigger's profile.
Corpus generate_synthetic(const TagSchema& schema, int n_sentences,
                          std::uint64_t seed,
                          const CooccurrenceProfile& profile);

/// Five entity types and three trigger types, ACE-style names.
TagSchema default_synthetic_schema();

}  // namespace csm::corpus
