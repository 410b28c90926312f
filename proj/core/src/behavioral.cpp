#include "brainalign/behavioral.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "brainalign/csv.hpp"
#include "brainalign/errors.hpp"
#include "brainalign/io.hpp"
#include "brainalign/metrics.hpp"

namespace brainalign {

double word_surprisal(const TokenLossRecord& rec) {
  if (rec.token_losses.empty())
    throw ValidationError("word_surprisal: no token losses for " + rec.stimulus_id + "#" + std::to_string(rec.word_index));
  double sum = 0.0;
  for (const double l : rec.token_losses) sum += l;
  return sum;
}

std::string normalize_word(std::string_view word) {
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!word.empty() && (is_punct(word.front()) || is_space(word.front()))) word.remove_prefix(1);
  while (!word.empty() && (is_punct(word.back()) || is_space(word.back()))) word.remove_suffix(1);
  std::string out(word);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

BehavioralResult behavioral_alignment(std::span<const TokenLossRecord> losses,
                                      std::span<const ReadingTimeRecord> rts) {
  using Key = std::pair<std::string, int>;
  std::map<Key, const TokenLossRecord*> by_key;
  for (const auto& rec : losses) {
    if (!by_key.emplace(Key{rec.stimulus_id, rec.word_index}, &rec).second)
      throw ValidationError("duplicate token-loss word " + rec.stimulus_id + "#" + std::to_string(rec.word_index));
  }
  std::map<std::string, int> first_index;
  std::map<Key, bool> rt_keys;
  for (const auto& rt : rts) {
    if (!std::isfinite(rt.mean_rt) || rt.mean_rt <= 0.0)
      throw ValidationError("reading time must be finite and positive for " + rt.stimulus_id + "#" +
                            std::to_string(rt.word_index));
    if (!rt_keys.emplace(Key{rt.stimulus_id, rt.word_index}, true).second)
      throw ValidationError("duplicate reading-time word " + rt.stimulus_id + "#" + std::to_string(rt.word_index));
    auto [it, inserted] = first_index.emplace(rt.stimulus_id, rt.word_index);
    if (!inserted) it->second = std::min(it->second, rt.word_index);
  }

  BehavioralResult result;
  for (const auto& [key, rec] : by_key)
    if (!rt_keys.contains(key)) ++result.excluded_unmatched;

  std::vector<double> surprisal, reading;
  for (const auto& rt : rts) {
    const auto it = by_key.find(Key{rt.stimulus_id, rt.word_index});
    if (it == by_key.end()) {
      ++result.excluded_unmatched;
      continue;
    }
    if (rt.word_index == first_index.at(rt.stimulus_id)) {
      ++result.excluded_first_word;
      continue;
    }
    if (normalize_word(it->second->word) != normalize_word(rt.word)) {
      ++result.excluded_text_mismatch;
      continue;
    }
    if (it->second->token_losses.empty()) {
      ++result.excluded_no_tokens;
      continue;
    }
    surprisal.push_back(word_surprisal(*it->second));
    reading.push_back(rt.mean_rt);
  }
  result.n_words = surprisal.size();
  if (result.n_words < 3)
    throw ScoreUndefined("behavioral_alignment: only " + std::to_string(result.n_words) + " joined words");
  try {
    result.r = pearson(surprisal, reading);
  } catch (const DegenerateInput& e) {
    throw ScoreUndefined(std::string("behavioral_alignment: ") + e.what());
  }
  return result;
}

using csv::parse_number;

std::vector<TokenLossRecord> read_token_losses_csv(const std::filesystem::path& path) {
  const auto rows = csv::read(path, {"stimulus_id", "word_index", "word", "token_index", "loss"});
  std::vector<TokenLossRecord> out;
  std::map<std::pair<std::string, int>, std::size_t> slot;
  std::vector<std::vector<std::pair<int, double>>> tokens;
  for (const auto& row : rows) {
    const int word_index = parse_number<int>(row[1], path);
    auto [it, inserted] = slot.emplace(std::pair{row[0], word_index}, out.size());
    if (inserted) {
      out.push_back({row[0], word_index, row[2], {}});
      tokens.emplace_back();
    }
    if (row[4].empty()) continue;
    const double loss = parse_number<double>(row[4], path);
    if (!std::isfinite(loss) || loss < 0.0) throw ValidationError(path.string() + ": token loss must be finite and >= 0");
    tokens[it->second].emplace_back(parse_number<int>(row[3], path), loss);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& t = tokens[i];
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [idx, loss] : t) out[i].token_losses.push_back(loss);
  }
  return out;
}

std::vector<ReadingTimeRecord> read_reading_times_csv(const std::filesystem::path& path) {
  const auto rows = csv::read(path, {"stimulus_id", "word_index", "word", "mean_rt_ms"});
  std::vector<ReadingTimeRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows)
    out.push_back({row[0], parse_number<int>(row[1], path), row[2], parse_number<double>(row[3], path)});
  return out;
}

}  // namespace brainalign
