#include "csm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csm/random.hpp"

namespace csm::corpus {

std::vector<Span> extract_spans(const AnnotatedSentence& sentence,
                                const TagSchema& schema, Role role) {
  std::vector<Span> spans;
  const auto& tags = sentence.tags;
  const int n = static_cast<int>(tags.size());
  int i = 0;
  while (i < n) {
    const int tag = tags[i];
    if (tag == TagSchema::kOutside || schema.role(tag) != role) {
      ++i;
      continue;
    }
    const int type = schema.type_index(tag);
    const int inside = schema.inside_tag(role, type);
    int j = i + 1;
    while (j < n && tags[j] == inside) ++j;
    Span s{i, j, role, type, {}};
    for (int k = i; k < j; ++k) {
      if (k > i) s.text += ' ';
      s.text += sentence.tokens[k];
    }
    spans.push_back(std::move(s));
    i = j;
  }
  return spans;
}

int first_bio_violation(const std::vector<int>& tags, const TagSchema& schema) {
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const int tag = tags[i];
    if (tag == TagSchema::kOutside || schema.is_begin(tag)) continue;
    const int begin = tag - 1;
    if (i == 0 || (tags[i - 1] != begin && tags[i - 1] != tag)) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int Vocab::add(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocab::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty() || tokens[0] != kUnknownToken) {
    throw ValidationError("vocab: index 0 must be the unknown token");
  }
  Vocab v;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != static_cast<int>(i)) {
      throw ValidationError("vocab: duplicate token '" + tokens[i] + "'");
    }
  }
  return v;
}

Vocab build_vocab(const std::vector<AnnotatedSentence>& sentences) {
  Vocab v;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) v.add(t);
  }
  return v;
}

std::vector<int> Corpus::encode(std::size_t i) const {
  const auto& toks = sentences.at(i).tokens;
  std::vector<int> ids(toks.size());
  std::transform(toks.begin(), toks.end(), ids.begin(),
                 [&](const std::string& t) { return vocab.lookup(t); });
  return ids;
}

Corpus parse_corpus(std::istream& in, const TagSchema& schema) {
  Corpus corpus;
  corpus.schema = schema;
  AnnotatedSentence current;
  int sentence_start = 0;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    const int bad = first_bio_violation(current.tags, schema);
    if (bad >= 0) {
      throw ValidationError("corpus: BIO violation at line " +
                            std::to_string(sentence_start + bad) + ": '" +
                            schema.tag_name(current.tags[bad]) +
                            "' does not continue a span of the same type");
    }
    corpus.sentences.push_back(std::move(current));
    current = {};
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("corpus: line " + std::to_string(lineno) +
                            ": expected 'token<TAB>tag'");
    }
    if (tab == 0) {
      throw ValidationError("corpus: line " + std::to_string(lineno) +
                            ": empty token");
    }
    const std::string tag_name = line.substr(tab + 1);
    const int tag = schema.tag_index(tag_name);
    if (tag < 0) {
      throw ValidationError("corpus: line " + std::to_string(lineno) +
                            ": unknown tag '" + tag_name + "'");
    }
    if (current.tokens.empty()) sentence_start = lineno;
    current.tokens.push_back(line.substr(0, tab));
    current.tags.push_back(tag);
  }
  flush();
  corpus.vocab = build_vocab(corpus.sentences);
  return corpus;
}

Corpus parse_corpus(std::string_view text, const TagSchema& schema) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in, schema);
}

Corpus load_corpus(const std::string& path, const TagSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus file: " + path);
  return parse_corpus(in, schema);
}

std::string serialize(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += corpus.schema.tag_name(s.tags[i]);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<Fold> kfold_split(const Corpus& corpus, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_split: k must be at least 2");
  if (static_cast<std::size_t>(k) > corpus.size()) {
    throw ValidationError("kfold_split: k=" + std::to_string(k) +
                          " exceeds the number of sentences (" +
                          std::to_string(corpus.size()) + ")");
  }
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(std::span(order), rng);

  std::vector<int> fold_of(corpus.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold_of[order[pos]] = static_cast<int>(pos % k);
  }

  std::vector<Fold> folds(k);
  for (int f = 0; f < k; ++f) {
    Fold& fold = folds[f];
    fold.train.schema = corpus.schema;
    fold.test.schema = corpus.schema;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      (fold_of[i] == f ? fold.test : fold.train)
          .sentences.push_back(corpus.sentences[i]);
    }
    fold.train.vocab = build_vocab(fold.train.sentences);
    fold.test.vocab = fold.train.vocab;
  }
  return folds;
}

}  // namespace csm::corpus
