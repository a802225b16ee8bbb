#pragma once

#include "scl/common.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace scl {

struct Token {
  std::string word;
  std::string pos;
  std::string chunk;
  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenSequence {
  std::vector<Token> tokens;
  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// The 23 CoNLL-2000 chunk labels: B-/I- for 11 chunk types, then O.
const std::vector<std::string>& chunk_labels();
/// Index into chunk_labels(), or -1.
int chunk_label_index(const std::string& label);

/// "word POS chunk" per line, blank line between sentences.
std::vector<TokenSequence> parse_conll(std::istream& in);
std::vector<TokenSequence> parse_conll(const std::string& path);
void write_conll(std::ostream& out, const std::vector<TokenSequence>& sequences);

std::map<std::string, std::size_t> label_histogram(const std::vector<TokenSequence>& sequences);
std::size_t token_count(const std::vector<TokenSequence>& sequences);

}  // namespace scl
