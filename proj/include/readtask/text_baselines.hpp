#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace readtask {

// English weights of the Flesch reading-ease formula.
struct FleschWeights {
  static constexpr double x = 206.835;
  static constexpr double y = 1.015;
  static constexpr double z = 84.6;
};

// Vowel-group heuristic: groups of a/e/i/o/u/y, minus a silent final "e"
// (kept after "l", as in "-le"), never less than 1.
int count_syllables(std::string_view word);

double flesch_score(double words, double sentences, double syllables);
// Score of one sentence given its tokens.
double flesch_score(std::span<const std::string> tokens);

// Static token -> vector table for the embedding baseline.
class EmbeddingTable {
public:
  EmbeddingTable() = default;
  EmbeddingTable(std::unordered_map<std::string, std::vector<double>> vectors,
                 std::vector<double> fallback);

  // Text format: one "token<TAB>v1 v2 ... vd" line per token. A token named
  // "<unk>" becomes the out-of-vocabulary fallback; otherwise zeros are used.
  static EmbeddingTable load(const std::filesystem::path& path);

  std::size_t dim() const { return fallback_.size(); }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& token) const { return vectors_.count(token) > 0; }
  const std::vector<double>& lookup(const std::string& token) const;
  const std::vector<double>& fallback() const { return fallback_; }

private:
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<double> fallback_;
};

}  // namespace readtask
