#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brainalign {

/// Per-token losses (nats) of one word.
struct TokenLossRecord {
  std::string stimulus_id;
  int word_index = 0;
  std::string word;
  std::vector<double> token_losses;
};

/// Participant-averaged reading time of one word, in milliseconds.
struct ReadingTimeRecord {
  std::string stimulus_id;
  int word_index = 0;
  std::string word;
  double mean_rt = 0.0;
};

/// Sum of the word's token losses.
double word_surprisal(const TokenLossRecord& rec);

/// Lower-cased word with leading and trailing ASCII punctuation removed.
std::string normalize_word(std::string_view word);

struct BehavioralResult {
  double r = 0.0;
  std::size_t n_words = 0;
  std::size_t excluded_unmatched = 0;      // key present on one side only
  std::size_t excluded_first_word = 0;     // story-initial words
  std::size_t excluded_text_mismatch = 0;  // same key, different word text
  std::size_t excluded_no_tokens = 0;      // word with no aligned tokens
};

/// Pearson correlation between per-word surprisal and mean reading time over
/// words joined on (stimulus_id, word_index). The story-initial word (lowest
/// reading-time word_index per stimulus) is excluded. Throws ScoreUndefined
/// if fewer than 3 words survive.
BehavioralResult behavioral_alignment(std::span<const TokenLossRecord> losses,
                                      std::span<const ReadingTimeRecord> rts);

/// token_losses.csv: stimulus_id,word_index,word,token_index,loss. Rows of
/// the same word are merged in token_index order; an empty loss marks a word
/// with no aligned tokens.
std::vector<TokenLossRecord> read_token_losses_csv(const std::filesystem::path& path);

/// reading_times.csv: stimulus_id,word_index,word,mean_rt_ms.
std::vector<ReadingTimeRecord> read_reading_times_csv(const std::filesystem::path& path);

}  // namespace brainalign
