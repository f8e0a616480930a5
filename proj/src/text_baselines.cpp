#include "readtask/text_baselines.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "readtask/error.hpp"

namespace readtask {

namespace {
bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}
}  // namespace

int count_syllables(std::string_view word) {
  std::string w;
  for (char c : word)
    if (std::isalpha(static_cast<unsigned char>(c)))
      w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (w.empty()) return 1;

  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = w.size();
  if (n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) && w[n - 2] != 'l') --groups;
  return groups < 1 ? 1 : groups;
}

double flesch_score(double words, double sentences, double syllables) {
  if (!(words > 0.0) || !(sentences > 0.0))
    throw DataError("Flesch score needs at least one word and one sentence");
  return FleschWeights::x - FleschWeights::y * (words / sentences) -
         FleschWeights::z * (syllables / words);
}

double flesch_score(std::span<const std::string> tokens) {
  if (tokens.empty()) throw DataError("Flesch score of an empty sentence");
  double syl = 0.0;
  for (const auto& t : tokens) syl += count_syllables(t);
  return flesch_score(static_cast<double>(tokens.size()), 1.0, syl);
}

EmbeddingTable::EmbeddingTable(std::unordered_map<std::string, std::vector<double>> vectors,
                               std::vector<double> fallback)
    : vectors_(std::move(vectors)), fallback_(std::move(fallback)) {
  for (const auto& [tok, v] : vectors_)
    if (v.size() != fallback_.size())
      throw ValidationError("embedding for '" + tok + "' has dimension " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(fallback_.size()));
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::vector<double> unk;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError(path.string(), line_no, "expected token<TAB>values");
    std::string token = line.substr(0, tab);
    std::istringstream vs(line.substr(tab + 1));
    std::vector<double> v;
    double x;
    while (vs >> x) v.push_back(x);
    if (!vs.eof()) throw ParseError(path.string(), line_no, "non-numeric embedding value");
    if (v.empty()) throw ParseError(path.string(), line_no, "empty embedding vector");
    if (dim == 0) dim = v.size();
    if (v.size() != dim)
      throw ParseError(path.string(), line_no,
                       "dimension " + std::to_string(v.size()) + " differs from " +
                           std::to_string(dim));
    if (token == "<unk>")
      unk = std::move(v);
    else
      vectors[std::move(token)] = std::move(v);
  }
  if (dim == 0) throw ParseError(path.string(), line_no, "embedding file is empty");
  if (unk.empty()) unk.assign(dim, 0.0);
  return EmbeddingTable(std::move(vectors), std::move(unk));
}

const std::vector<double>& EmbeddingTable::lookup(const std::string& token) const {
  if (auto it = vectors_.find(token); it != vectors_.end()) return it->second;
  return fallback_;
}

}  // namespace readtask
