#include "scl/conll.hpp"

#include <fstream>
#include <sstream>

namespace scl {

const std::vector<std::string>& chunk_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> out;
    for (const char* t : {"ADJP", "ADVP", "CONJP", "INTJ", "LST", "NP", "PP", "PRT", "SBAR", "UCP", "VP"}) {
      out.push_back(std::string("B-") + t);
      out.push_back(std::string("I-") + t);
    }
    out.push_back("O");
    return out;
  }();
  return labels;
}

int chunk_label_index(const std::string& label) {
  const auto& l = chunk_labels();
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] == label) return static_cast<int>(i);
  return -1;
}

std::vector<TokenSequence> parse_conll(std::istream& in) {
  std::vector<TokenSequence> out;
  TokenSequence cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string s; fields >> s;) f.push_back(s);
    if (f.empty()) {
      if (!cur.tokens.empty()) out.push_back(std::move(cur));
      cur = {};
      continue;
    }
    if (f.size() != 3) throw ParseError("expected 3 columns, found " + std::to_string(f.size()), lineno);
    if (chunk_label_index(f[2]) < 0) throw ParseError("unknown chunk label '" + f[2] + "'", lineno);
    cur.tokens.push_back({f[0], f[1], f[2]});
  }
  if (!cur.tokens.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TokenSequence> parse_conll(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return parse_conll(in);
}

void write_conll(std::ostream& out, const std::vector<TokenSequence>& sequences) {
  for (const auto& s : sequences) {
    for (const auto& t : s.tokens) out << t.word << ' ' << t.pos << ' ' << t.chunk << '\n';
    out << '\n';
  }
}

std::map<std::string, std::size_t> label_histogram(const std::vector<TokenSequence>& sequences) {
  std::map<std::string, std::size_t> h;
  for (const auto& s : sequences)
    for (const auto& t : s.tokens) ++h[t.chunk];
  return h;
}

std::size_t token_count(const std::vector<TokenSequence>& sequences) {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.size();
  return n;
}

}  // namespace scl
