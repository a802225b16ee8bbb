#include "scl/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace scl {

bool is_stopword(std::string_view word) {
  static const std::unordered_set<std::string> set(stopword_list().begin(), stopword_list().end());
  std::string lower(word);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return set.count(lower) > 0;
}

namespace {

std::string bigram(const std::string& a, const std::string& b) { return a + "|" + b; }

// Keys for the six vocabulary categories at position t.
std::array<std::string, 6> keys(const TokenSequence& s, std::size_t t) {
  const auto& tok = s.tokens;
  const bool last = t + 1 == tok.size();
  const std::string& nw = last ? std::string(kEos) : tok[t + 1].word;
  const std::string& np = last ? std::string(kEos) : tok[t + 1].pos;
  const std::string pw = t == 0 ? std::string(kBos) : tok[t - 1].word;
  const std::string pp = t == 0 ? std::string(kBos) : tok[t - 1].pos;
  return {tok[t].word,          tok[t].pos,          bigram(tok[t].word, nw),
          bigram(pw, tok[t].word), bigram(tok[t].pos, np), bigram(pp, tok[t].pos)};
}

}  // namespace

FeatureSpec FeatureSpec::build(const std::vector<TokenSequence>& train) {
  std::array<std::set<std::string>, 6> seen;
  for (const auto& s : train)
    for (std::size_t t = 0; t < s.size(); ++t) {
      auto k = keys(s, t);
      for (int c = 0; c < 6; ++c) seen[c].insert(k[c]);
    }
  FeatureSpec spec;
  int offset = 0;
  for (int c = 0; c < 6; ++c) {
    spec.offsets_[c] = offset;
    int id = 1;  // 0 is UNK
    for (const auto& key : seen[c]) spec.vocab_[c][key] = id++;
    offset += id;
  }
  spec.offsets_[6] = offset;
  spec.total_ = offset + 2;
  return spec;
}

int FeatureSpec::category_size(FeatureCategory c) const {
  const int i = static_cast<int>(c);
  return (i + 1 < kNumFeatureCategories ? offsets_[i + 1] : total_) - offsets_[i];
}

int FeatureSpec::lookup(int category, const std::string& key) const {
  auto it = vocab_[category].find(key);
  return it == vocab_[category].end() ? 0 : it->second;
}

std::array<int, kNumFeatureCategories> FeatureSpec::active(const TokenSequence& s, std::size_t t) const {
  auto k = keys(s, t);
  std::array<int, kNumFeatureCategories> out{};
  for (int c = 0; c < 6; ++c) out[c] = offsets_[c] + lookup(c, k[c]);
  out[6] = offsets_[6] + (is_stopword(s.tokens[t].word) ? 0 : 1);
  return out;
}

std::string FeatureSpec::feature_name(int id) const {
  static const char* names[] = {"w", "pos", "w+1", "w-1", "pos+1", "pos-1", "stop"};
  if (id < 0 || id >= total_) throw DimensionError("feature id out of range");
  int c = kNumFeatureCategories - 1;
  while (offsets_[c] > id) --c;
  const int local = id - offsets_[c];
  if (c == 6) return local == 0 ? "stop=1" : "stop=0";
  if (local == 0) return std::string(names[c]) + "=" + kUnk;
  for (const auto& [key, v] : vocab_[c])
    if (v == local) return std::string(names[c]) + "=" + key;
  return names[c];
}

int FeatureSpec::word_symbol(const std::string& word) const { return lookup(0, word); }

Dataset extract_features(const std::vector<TokenSequence>& sequences, const FeatureSpec& spec) {
  Dataset d;
  for (const auto& s : sequences) {
    if (s.tokens.empty()) continue;
    Sample x;
    for (std::size_t t = 0; t < s.size(); ++t) {
      const int y = chunk_label_index(s.tokens[t].chunk);
      if (y < 0) throw ContractError("unknown chunk label '" + s.tokens[t].chunk + "'");
      x.values.push_back(y);
      auto a = spec.active(s, t);
      x.observed.emplace_back(a.begin(), a.end());
    }
    d.samples.push_back(std::move(x));
  }
  return d;
}

Dataset chain_samples(const std::vector<TokenSequence>& sequences, const FeatureSpec& spec) {
  Dataset d;
  for (const auto& s : sequences) {
    if (s.tokens.empty()) continue;
    Sample x;
    const std::size_t T = s.size();
    x.values.resize(2 * T);
    for (std::size_t t = 0; t < T; ++t) {
      const int y = chunk_label_index(s.tokens[t].chunk);
      if (y < 0) throw ContractError("unknown chunk label '" + s.tokens[t].chunk + "'");
      x.values[t] = y;
      x.values[T + t] = spec.word_symbol(s.tokens[t].word);
    }
    d.samples.push_back(std::move(x));
  }
  return d;
}

std::vector<std::pair<int, int>> supported_pairs(const Dataset& crf_data) {
  std::set<std::pair<int, int>> s;
  for (const auto& x : crf_data.samples)
    for (std::size_t t = 0; t < x.values.size(); ++t)
      for (int k : x.observed[t]) s.emplace(x.values[t], k);
  return {s.begin(), s.end()};
}

}  // namespace scl
