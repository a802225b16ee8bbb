#pragma once

#include "scl/conll.hpp"
#include "scl/model.hpp"

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scl {

/// Shipped SMART stopword list (data/smart_stopwords.txt).
const std::vector<std::string>& stopword_list();
/// Case-insensitive membership in the stopword list.
bool is_stopword(std::string_view word);

enum class FeatureCategory {
  word,
  pos,
  word_bigram_forward,   // (w_t, w_t+1), EOS past the end
  word_bigram_backward,  // (w_t-1, w_t), BOS before the start
  pos_bigram_forward,
  pos_bigram_backward,
  stopword,  // two slots: stopword, not a stopword
};
inline constexpr int kNumFeatureCategories = 7;

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

/// Binary observation features, one active per category at every position.
/// Vocabularies come from the training corpus; ids are category-major, with
/// the UNK slot first and the keys in sorted order after it.
class FeatureSpec {
 public:
  static FeatureSpec build(const std::vector<TokenSequence>& train);

  int num_features() const { return total_; }
  int category_offset(FeatureCategory c) const { return offsets_[static_cast<int>(c)]; }
  int category_size(FeatureCategory c) const;
  /// The 7 active feature ids at position t.
  std::array<int, kNumFeatureCategories> active(const TokenSequence& s, std::size_t t) const;
  std::string feature_name(int id) const;
  /// Word symbol id for Boltzmann chains: the word unigram slot within its category.
  int word_symbol(const std::string& word) const;
  int num_word_symbols() const { return category_size(FeatureCategory::word); }

 private:
  int lookup(int category, const std::string& key) const;
  std::array<std::map<std::string, int>, kNumFeatureCategories - 1> vocab_;
  std::array<int, kNumFeatureCategories> offsets_{};
  int total_ = 0;
};

/// CRF samples: labels as chunk_labels() indices, observed = active feature ids.
Dataset extract_features(const std::vector<TokenSequence>& sequences, const FeatureSpec& spec);
/// Boltzmann-chain samples (labels, word symbols).
Dataset chain_samples(const std::vector<TokenSequence>& sequences, const FeatureSpec& spec);
/// (label, feature) pairs that occur in a featurized dataset, sorted.
std::vector<std::pair<int, int>> supported_pairs(const Dataset& crf_data);

}  // namespace scl
