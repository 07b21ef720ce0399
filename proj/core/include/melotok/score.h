#ifndef MELOTOK_SCORE_H_
#define MELOTOK_SCORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "melotok/melody.h"

namespace melotok {

inline constexpr int kRest = -1;

struct Note {
  std::string lyric;
  std::vector<std::string> phonemes;
  int midi = kRest;  // 1..127, or kRest
  double onset_sec = 0.0;
  double offset_sec = 0.0;

  bool is_rest() const { return midi == kRest; }
  double duration() const { return offset_sec - onset_sec; }

  bool operator==(const Note&) const = default;
};

struct MusicScore {
  std::vector<Note> notes;

  double total_duration() const {
    return notes.empty() ? 0.0 : notes.back().offset_sec;
  }

  // Throws ParseError (line = 1-based note index) on an invalid note.
  void Validate() const;
};

// One note per line:
//   lyric <TAB> phonemes (space separated) <TAB> midi <TAB> onset <TAB> offset
// Blank lines and lines starting with '#' are skipped; midi 0 is a rest.
MusicScore ParseScore(std::string_view text);
MusicScore ReadScore(const std::filesystem::path& path);

// Frame-level expansion of a score. Phoneme ids index `phone_table`.
struct FramePlan {
  std::vector<std::uint32_t> phone_ids;
  std::vector<int> midi;  // kRest for rest frames
  std::vector<std::uint32_t> note_index;
  std::vector<std::string> phone_table;
  double fps = kDefaultFps;

  std::size_t size() const { return phone_ids.size(); }

  bool operator==(const FramePlan&) const = default;
};

// Frame boundary for a time in seconds: round(t * fps), halves up.
std::size_t FrameBoundary(double seconds, double fps);

// Cumulative-rounding length regulation. Note k covers
// [FrameBoundary(offset_{k-1}), FrameBoundary(offset_k)) with the first note
// starting at frame 0; a note's frames are split evenly among its phonemes by
// the same cumulative rule. Phoneme ids are assigned in order of first
// appearance.
FramePlan Regulate(const MusicScore& score, double fps);

// Voiced at the note's equal-tempered pitch; rest frames unvoiced.
MelodyTrack ScoreMelody(const FramePlan& plan);

// PLAN binary (little-endian):
//   "PLAN" | version u16 = 1 | fps f32 | P u32 | P x (len u16, UTF-8 bytes) |
//   N u64 | N x phone u32 | N x midi u8 (0 = rest) | N x note u32
std::vector<unsigned char> SerializePlan(const FramePlan& plan);
FramePlan ParsePlan(std::span<const unsigned char> bytes);
void WritePlan(const FramePlan& plan, const std::filesystem::path& path);
FramePlan ReadPlan(const std::filesystem::path& path);

}  // namespace melotok

#endif  // MELOTOK_SCORE_H_
