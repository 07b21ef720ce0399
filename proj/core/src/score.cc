#include "melotok/score.h"

#include <charconv>
#include <cmath>
#include <map>
#include <string>
#include <system_error>

#include "byte_io.h"
#include "melotok/error.h"

namespace melotok {

namespace {

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \r\n");
  return s.substr(first, last - first + 1);
}

double ParseSeconds(std::string_view field, std::size_t line, const char* what) {
  const std::string text(Trim(field));
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || !std::isfinite(value)) {
    throw ParseError(line, std::string("malformed ") + what + " '" + text + "'");
  }
  return value;
}

void CheckNote(const Note& note, const Note* previous, std::size_t line) {
  if (note.midi != kRest && (note.midi < 1 || note.midi > 127)) {
    throw ParseError(line, "midi " + std::to_string(note.midi) + " out of range");
  }
  if (note.phonemes.empty()) {
    throw ParseError(line, "note has no phonemes");
  }
  if (note.onset_sec < 0.0) {
    throw ParseError(line, "negative onset");
  }
  if (!(note.offset_sec > note.onset_sec)) {
    throw ParseError(line, "non-positive duration");
  }
  if (previous != nullptr && note.onset_sec < previous->offset_sec) {
    throw ParseError(line, "overlaps or precedes the previous note");
  }
}

}  // namespace

void MusicScore::Validate() const {
  for (std::size_t k = 0; k < notes.size(); ++k) {
    CheckNote(notes[k], k == 0 ? nullptr : &notes[k - 1], k + 1);
  }
}

MusicScore ParseScore(std::string_view text) {
  MusicScore score;
  std::size_t line_no = 0;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (Trim(raw).empty() || raw.front() == '#') continue;

    const auto fields = Split(raw, '\t');
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    Note note;
    note.lyric = std::string(Trim(fields[0]));
    for (std::string_view p : Split(fields[1], ' ')) {
      p = Trim(p);
      if (!p.empty()) note.phonemes.emplace_back(p);
    }
    const std::string_view midi_text = Trim(fields[2]);
    int midi = 0;
    const auto [end, ec] =
        std::from_chars(midi_text.data(), midi_text.data() + midi_text.size(), midi);
    if (ec != std::errc() || end != midi_text.data() + midi_text.size()) {
      throw ParseError(line_no, "malformed midi '" + std::string(midi_text) + "'");
    }
    note.midi = midi == 0 ? kRest : midi;
    if (midi < 0 || midi > 127) {
      throw ParseError(line_no, "midi " + std::to_string(midi) + " out of range");
    }
    note.onset_sec = ParseSeconds(fields[3], line_no, "onset");
    note.offset_sec = ParseSeconds(fields[4], line_no, "offset");
    CheckNote(note, score.notes.empty() ? nullptr : &score.notes.back(), line_no);
    score.notes.push_back(std::move(note));
  }
  return score;
}

MusicScore ReadScore(const std::filesystem::path& path) {
  const auto bytes = internal::ReadFileBytes(path);
  return ParseScore(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                     bytes.size()));
}

std::size_t FrameBoundary(double seconds, double fps) {
  // The epsilon keeps decimal halves such as 0.03 s * 50 fps on the upper side.
  return static_cast<std::size_t>(std::floor(seconds * fps + 0.5 + 1e-9));
}

FramePlan Regulate(const MusicScore& score, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw Error(ErrorCode::kInvalidArgument, "regulate: fps must be positive");
  }
  score.Validate();

  FramePlan plan;
  plan.fps = fps;
  std::map<std::string, std::uint32_t, std::less<>> ids;
  auto phone_id = [&](const std::string& p) {
    auto it = ids.find(p);
    if (it != ids.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(plan.phone_table.size());
    ids.emplace(p, id);
    plan.phone_table.push_back(p);
    return id;
  };

  std::size_t start = 0;
  for (std::size_t k = 0; k < score.notes.size(); ++k) {
    const Note& note = score.notes[k];
    const std::size_t end = std::max(start, FrameBoundary(note.offset_sec, fps));
    const std::size_t frames = end - start;
    const std::size_t phones = note.phonemes.size();
    std::size_t done = 0;
    for (std::size_t p = 0; p < phones; ++p) {
      const std::uint32_t id = phone_id(note.phonemes[p]);
      // Same cumulative rule inside the note.
      const std::size_t upto = static_cast<std::size_t>(
          std::floor(static_cast<double>(frames) * (p + 1) / phones + 0.5));
      for (; done < upto; ++done) {
        plan.phone_ids.push_back(id);
        plan.midi.push_back(note.midi);
        plan.note_index.push_back(static_cast<std::uint32_t>(k));
      }
    }
    start = end;
  }
  return plan;
}

MelodyTrack ScoreMelody(const FramePlan& plan) {
  MelodyTrack m;
  m.fps = plan.fps;
  m.lf0.resize(plan.size(), 0.0);
  m.voiced.resize(plan.size(), false);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan.midi[i] != kRest) {
      m.voiced[i] = true;
      m.lf0[i] = std::log(MidiToHz(plan.midi[i]));
    }
  }
  return m;
}

namespace {

constexpr char kPlanMagic[] = "PLAN";
constexpr std::uint16_t kPlanVersion = 1;

}  // namespace

std::vector<unsigned char> SerializePlan(const FramePlan& plan) {
  const std::size_t n = plan.size();
  if (plan.midi.size() != n || plan.note_index.size() != n) {
    throw Error(ErrorCode::kEncode, "plan: per-frame sequences differ in length");
  }
  internal::ByteWriter w;
  w.Tag(kPlanMagic);
  w.U16(kPlanVersion);
  w.F32(static_cast<float>(plan.fps));
  w.U32(static_cast<std::uint32_t>(plan.phone_table.size()));
  for (const std::string& p : plan.phone_table) {
    if (p.size() > 0xFFFF) throw Error(ErrorCode::kEncode, "plan: phoneme too long");
    w.U16(static_cast<std::uint16_t>(p.size()));
    w.Raw(reinterpret_cast<const unsigned char*>(p.data()), p.size());
  }
  w.U64(n);
  for (std::uint32_t id : plan.phone_ids) {
    if (id >= plan.phone_table.size()) {
      throw Error(ErrorCode::kEncode, "plan: phoneme id out of range");
    }
    w.U32(id);
  }
  for (int m : plan.midi) w.U8(static_cast<std::uint8_t>(m == kRest ? 0 : m));
  for (std::uint32_t k : plan.note_index) w.U32(k);
  return w.Take();
}

FramePlan ParsePlan(std::span<const unsigned char> bytes) {
  internal::ByteReader r(bytes.data(), bytes.size(), "plan");
  if (!r.TagMatches(kPlanMagic)) throw Error(ErrorCode::kFormat, "plan: bad magic");
  r.Take(4);
  if (r.U16() != kPlanVersion) {
    throw Error(ErrorCode::kFormat, "plan: unsupported version");
  }
  FramePlan plan;
  plan.fps = r.F32();
  const std::uint32_t phones = r.U32();
  for (std::uint32_t p = 0; p < phones; ++p) {
    const std::uint16_t len = r.U16();
    const unsigned char* s = r.Take(len);
    plan.phone_table.emplace_back(reinterpret_cast<const char*>(s), len);
  }
  const std::uint64_t n = r.U64();
  if (n > r.remaining() || n * 9 != r.remaining()) {
    throw Error(ErrorCode::kCorruption, "plan: payload size does not match N");
  }
  plan.phone_ids.resize(n);
  plan.midi.resize(n);
  plan.note_index.resize(n);
  for (auto& id : plan.phone_ids) {
    id = r.U32();
    if (id >= phones) throw Error(ErrorCode::kCorruption, "plan: phoneme id out of range");
  }
  for (auto& m : plan.midi) {
    const std::uint8_t v = r.U8();
    if (v > 127) throw Error(ErrorCode::kCorruption, "plan: midi out of range");
    m = v == 0 ? kRest : v;
  }
  for (auto& k : plan.note_index) k = r.U32();
  return plan;
}

void WritePlan(const FramePlan& plan, const std::filesystem::path& path) {
  internal::WriteFileBytes(path, SerializePlan(plan));
}

FramePlan ReadPlan(const std::filesystem::path& path) {
  return ParsePlan(internal::ReadFileBytes(path));
}

}  // namespace melotok
