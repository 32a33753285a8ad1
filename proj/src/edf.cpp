#include "somno/edf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "somno/error.hpp"

namespace somno::edf {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kPerSignalBytes = 256;
constexpr char kTalDuration = '\x15';
constexpr char kTalSeparator = '\x14';

std::string trim(std::string_view field) {
  std::size_t begin = field.find_first_not_of(' ');
  if (begin == std::string_view::npos) return "";
  std::size_t end = field.find_last_not_of(' ');
  return std::string(field.substr(begin, end - begin + 1));
}

long parse_long(std::string_view field, const char* what) {
  const std::string text = trim(field);
  if (text.empty()) raise(ErrorCode::IoError, std::string("empty numeric header field: ") + what);
  char* end = nullptr;
  const long value = std::strtol(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size())
    raise(ErrorCode::IoError, std::string("malformed integer header field: ") + what + " = '" + text + "'");
  return value;
}

double parse_double(std::string_view field, const char* what) {
  const std::string text = trim(field);
  if (text.empty()) raise(ErrorCode::IoError, std::string("empty numeric header field: ") + what);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    raise(ErrorCode::IoError, std::string("malformed numeric header field: ") + what + " = '" + text + "'");
  return value;
}

// EDF numeric fields are written as compactly as possible: integers without
// a decimal point, reals with trailing zeros stripped.
std::string format_number(double value) {
  if (value == std::floor(value) && std::abs(value) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", value);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8g", value);
  return buf;
}

void put_field(std::string& out, std::string_view text, std::size_t width,
               const char* what) {
  if (text.size() > width)
    raise(ErrorCode::IoError,
          std::string("header field too wide: ") + what + " = '" + std::string(text) + "'");
  out.append(text);
  out.append(width - text.size(), ' ');
}

StartDateTime parse_start(std::string_view date, std::string_view time) {
  auto two = [](std::string_view s, std::size_t at) {
    if (s.size() < at + 2 || !std::isdigit((unsigned char)s[at]) ||
        !std::isdigit((unsigned char)s[at + 1]))
      raise(ErrorCode::IoError, "malformed start date/time field");
    return (s[at] - '0') * 10 + (s[at + 1] - '0');
  };
  StartDateTime out;
  out.day = two(date, 0);
  out.month = two(date, 3);
  const int yy = two(date, 6);
  out.year = yy >= 85 ? 1900 + yy : 2000 + yy;  // EDF+ clipping rule
  out.hour = two(time, 0);
  out.minute = two(time, 3);
  out.second = two(time, 6);
  return out;
}

std::string format_start_date(const StartDateTime& s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d.%02d.%02d", s.day, s.month, s.year % 100);
  return buf;
}

std::string format_start_time(const StartDateTime& s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d.%02d.%02d", s.hour, s.minute, s.second);
  return buf;
}

std::int64_t stream_size(std::istream& in) {
  const auto at = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(at);
  return static_cast<std::int64_t>(end);
}

long resolve_n_records(const EdfHeader& header, std::int64_t file_size) {
  const long rec = header.record_size_bytes();
  if (rec <= 0) raise(ErrorCode::TruncatedRecord, "record size is zero");
  const auto data = file_size - header.header_bytes;
  if (data < 0) raise(ErrorCode::TruncatedRecord, "file shorter than its header");
  return static_cast<long>(data / rec);
}

}  // namespace

long EdfHeader::record_size_bytes() const {
  long total = 0;
  for (const auto& s : signals) total += 2L * s.samples_per_record;
  return total;
}

int EdfHeader::signal_index(std::string_view label) const {
  for (std::size_t i = 0; i < signals.size(); ++i)
    if (signals[i].label == label) return static_cast<int>(i);
  return -1;
}

EdfHeader parse_header(std::string_view bytes) {
  if (bytes.size() < kFixedHeaderBytes)
    raise(ErrorCode::TruncatedHeader,
          "need at least 256 bytes, got " + std::to_string(bytes.size()));

  auto field = [&](std::size_t at, std::size_t width) {
    return bytes.substr(at, width);
  };

  EdfHeader h;
  h.version = trim(field(0, 8));
  h.patient_id = trim(field(8, 80));
  h.recording_id = trim(field(88, 80));
  h.start = parse_start(field(168, 8), field(176, 8));
  h.header_bytes = parse_long(field(184, 8), "header_bytes");
  h.reserved = trim(field(192, 44));
  h.n_records = parse_long(field(236, 8), "n_records");
  h.record_duration_s = parse_double(field(244, 8), "record_duration");
  h.n_signals = static_cast<int>(parse_long(field(252, 4), "n_signals"));

  if (h.n_signals < 0) raise(ErrorCode::IoError, "negative signal count");
  const std::size_t want = kFixedHeaderBytes + kPerSignalBytes * std::size_t(h.n_signals);
  if (h.header_bytes != static_cast<long>(want))
    raise(ErrorCode::InconsistentHeaderBytes,
          "declared " + std::to_string(h.header_bytes) + ", expected " + std::to_string(want));
  if (bytes.size() < want)
    raise(ErrorCode::TruncatedHeader,
          "header declares " + std::to_string(want) + " bytes, got " + std::to_string(bytes.size()));
  if (h.n_records < -1) raise(ErrorCode::IoError, "negative record count");

  for (std::size_t i = 0; i < want; ++i) {
    const unsigned char c = static_cast<unsigned char>(bytes[i]);
    if (c < 32 || c > 126)
      raise(ErrorCode::NonAsciiField,
            "byte " + std::to_string(i) + " = " + std::to_string(int(c)));
  }

  // The per-signal block is field-major: all labels, then all transducers, ...
  const std::size_t ns = std::size_t(h.n_signals);
  std::size_t at = kFixedHeaderBytes;
  h.signals.resize(ns);
  auto column = [&](std::size_t width, auto&& apply) {
    for (std::size_t i = 0; i < ns; ++i) apply(h.signals[i], field(at + i * width, width));
    at += ns * width;
  };
  column(16, [](SignalSpec& s, std::string_view f) { s.label = trim(f); });
  column(80, [](SignalSpec& s, std::string_view f) { s.transducer = trim(f); });
  column(8, [](SignalSpec& s, std::string_view f) { s.physical_dim = trim(f); });
  column(8, [](SignalSpec& s, std::string_view f) { s.physical_min = parse_double(f, "physical_min"); });
  column(8, [](SignalSpec& s, std::string_view f) { s.physical_max = parse_double(f, "physical_max"); });
  column(8, [](SignalSpec& s, std::string_view f) { s.digital_min = int(parse_long(f, "digital_min")); });
  column(8, [](SignalSpec& s, std::string_view f) { s.digital_max = int(parse_long(f, "digital_max")); });
  column(80, [](SignalSpec& s, std::string_view f) { s.prefiltering = trim(f); });
  column(8, [](SignalSpec& s, std::string_view f) { s.samples_per_record = int(parse_long(f, "samples_per_record")); });
  column(32, [](SignalSpec& s, std::string_view f) { s.reserved = trim(f); });

  for (const auto& s : h.signals) {
    if (s.samples_per_record <= 0)
      raise(ErrorCode::IoError, "signal '" + s.label + "' has no samples per record");
    if (s.digital_min >= s.digital_max)
      raise(ErrorCode::IoError, "signal '" + s.label + "' has digital_min >= digital_max");
  }
  return h;
}

std::string serialize_header(const EdfHeader& h) {
  std::string out;
  out.reserve(kFixedHeaderBytes + kPerSignalBytes * h.signals.size());
  put_field(out, h.version, 8, "version");
  put_field(out, h.patient_id, 80, "patient_id");
  put_field(out, h.recording_id, 80, "recording_id");
  put_field(out, format_start_date(h.start), 8, "start_date");
  put_field(out, format_start_time(h.start), 8, "start_time");
  put_field(out, std::to_string(h.header_bytes), 8, "header_bytes");
  put_field(out, h.reserved, 44, "reserved");
  put_field(out, std::to_string(h.n_records), 8, "n_records");
  put_field(out, format_number(h.record_duration_s), 8, "record_duration");
  put_field(out, std::to_string(h.n_signals), 4, "n_signals");

  auto column = [&](std::size_t width, auto&& get, const char* what) {
    for (const auto& s : h.signals) put_field(out, get(s), width, what);
  };
  column(16, [](const SignalSpec& s) { return s.label; }, "label");
  column(80, [](const SignalSpec& s) { return s.transducer; }, "transducer");
  column(8, [](const SignalSpec& s) { return s.physical_dim; }, "physical_dim");
  column(8, [](const SignalSpec& s) { return format_number(s.physical_min); }, "physical_min");
  column(8, [](const SignalSpec& s) { return format_number(s.physical_max); }, "physical_max");
  column(8, [](const SignalSpec& s) { return std::to_string(s.digital_min); }, "digital_min");
  column(8, [](const SignalSpec& s) { return std::to_string(s.digital_max); }, "digital_max");
  column(80, [](const SignalSpec& s) { return s.prefiltering; }, "prefiltering");
  column(8, [](const SignalSpec& s) { return std::to_string(s.samples_per_record); }, "samples_per_record");
  column(32, [](const SignalSpec& s) { return s.reserved; }, "reserved");
  return out;
}

SignalTrace read_signal(std::istream& in, const EdfHeader& header,
                        std::string_view channel) {
  const int idx = header.signal_index(channel);
  if (idx < 0)
    raise(ErrorCode::UnknownChannel, "no signal labelled '" + std::string(channel) + "'");
  const SignalSpec& spec = header.signals[idx];
  if (spec.digital_min == spec.digital_max)
    raise(ErrorCode::DegenerateCalibration, "digital_min == digital_max for '" + spec.label + "'");
  if (header.record_duration_s <= 0.0)
    raise(ErrorCode::IoError, "record duration must be positive for PSG reads");

  const std::int64_t size = stream_size(in);
  const long n_records = header.n_records >= 0 ? header.n_records
                                               : resolve_n_records(header, size);
  const long record_size = header.record_size_bytes();
  if (size < header.header_bytes + std::int64_t(n_records) * record_size)
    raise(ErrorCode::TruncatedRecord,
          "data region holds fewer than " + std::to_string(n_records) + " records");

  long signal_offset = 0;
  for (int i = 0; i < idx; ++i) signal_offset += 2L * header.signals[i].samples_per_record;

  const double gain = (spec.physical_max - spec.physical_min) /
                      (double(spec.digital_max) - double(spec.digital_min));

  SignalTrace trace;
  trace.label = spec.label;
  trace.fs = spec.samples_per_record / header.record_duration_s;
  trace.samples.resize(std::size_t(n_records) * spec.samples_per_record);

  std::vector<char> buf(std::size_t(spec.samples_per_record) * 2);
  for (long r = 0; r < n_records; ++r) {
    in.seekg(header.header_bytes + r * record_size + signal_offset);
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size()))
      raise(ErrorCode::TruncatedRecord, "short read in record " + std::to_string(r));
    double* out = trace.samples.data() + std::size_t(r) * spec.samples_per_record;
    for (int i = 0; i < spec.samples_per_record; ++i) {
      // 2-byte little-endian two's-complement
      const std::int16_t dig = std::int16_t(std::uint16_t(std::uint8_t(buf[2 * i])) |
                                            (std::uint16_t(std::uint8_t(buf[2 * i + 1])) << 8));
      out[i] = (double(dig) - spec.digital_min) * gain + spec.physical_min;
    }
  }
  return trace;
}

SignalTrace read_signal(const std::filesystem::path& path,
                        const EdfHeader& header, std::string_view channel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
  return read_signal(in, header, channel);
}

std::vector<AnnotationEvent> parse_tal_stream(std::string_view bytes) {
  std::vector<AnnotationEvent> events;
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] != '\0') {
    // onset: [+|-]digits[.digits], ended by 0x15 (duration follows) or 0x14
    std::size_t end = pos;
    while (end < bytes.size() && bytes[end] != kTalDuration && bytes[end] != kTalSeparator)
      ++end;
    if (end == bytes.size())
      raise(ErrorCode::MalformedTal, "onset not terminated by 0x14");
    const std::string onset_text(bytes.substr(pos, end - pos));
    char* num_end = nullptr;
    const double onset = std::strtod(onset_text.c_str(), &num_end);
    if (onset_text.empty() || num_end != onset_text.c_str() + onset_text.size() ||
        (onset_text[0] != '+' && onset_text[0] != '-'))
      raise(ErrorCode::MalformedTal, "non-numeric onset '" + onset_text + "'");

    double duration = 0.0;
    pos = end;
    if (bytes[pos] == kTalDuration) {
      ++pos;
      end = pos;
      while (end < bytes.size() && bytes[end] != kTalSeparator) ++end;
      if (end == bytes.size())
        raise(ErrorCode::MalformedTal, "duration not terminated by 0x14");
      const std::string dur_text(bytes.substr(pos, end - pos));
      duration = std::strtod(dur_text.c_str(), &num_end);
      if (dur_text.empty() || num_end != dur_text.c_str() + dur_text.size() || duration < 0)
        raise(ErrorCode::MalformedTal, "bad duration '" + dur_text + "'");
      pos = end;
    }
    ++pos;  // consume the 0x14 after onset/duration

    // zero or more annotations, each terminated by 0x14; TAL ends at 0x00
    bool saw_terminator = false;
    while (pos < bytes.size() && bytes[pos] != '\0') {
      end = bytes.find(kTalSeparator, pos);
      if (end == std::string_view::npos)
        raise(ErrorCode::MalformedTal, "annotation not terminated by 0x14");
      events.push_back({onset, duration, std::string(bytes.substr(pos, end - pos))});
      pos = end + 1;
      saw_terminator = true;
      if (pos < bytes.size() && bytes[pos] == '\0') break;
    }
    if (!saw_terminator && pos < bytes.size() && bytes[pos] == '\0')
      raise(ErrorCode::MalformedTal, "TAL carries no annotation terminator");
    while (pos < bytes.size() && bytes[pos] == '\0') ++pos;
  }
  return events;
}

std::vector<AnnotationEvent> parse_annotations(std::istream& in,
                                               const EdfHeader& header) {
  const int idx = header.signal_index("EDF Annotations");
  if (idx < 0)
    raise(ErrorCode::UnknownChannel, "file has no 'EDF Annotations' signal");
  const SignalSpec& spec = header.signals[idx];

  const std::int64_t size = stream_size(in);
  const long n_records = header.n_records >= 0 ? header.n_records
                                               : resolve_n_records(header, size);
  const long record_size = header.record_size_bytes();

  long signal_offset = 0;
  for (int i = 0; i < idx; ++i) signal_offset += 2L * header.signals[i].samples_per_record;

  std::vector<AnnotationEvent> events;
  std::vector<char> buf(std::size_t(spec.samples_per_record) * 2);
  for (long r = 0; r < n_records; ++r) {
    in.seekg(header.header_bytes + r * record_size + signal_offset);
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size()))
      raise(ErrorCode::TruncatedRecord, "short read in record " + std::to_string(r));
    auto parsed = parse_tal_stream(std::string_view(buf.data(), buf.size()));
    events.insert(events.end(), parsed.begin(), parsed.end());
  }
  return events;
}

std::vector<AnnotationEvent> parse_annotations(const std::filesystem::path& path,
                                               const EdfHeader& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
  return parse_annotations(in, header);
}

SleepStage stage_from_label(std::string_view label) {
  static const std::map<std::string_view, SleepStage> table = {
      {"Sleep stage W", SleepStage::Wake},
      {"Sleep stage 1", SleepStage::N1},
      {"Sleep stage 2", SleepStage::N2},
      {"Sleep stage 3", SleepStage::N3},
      {"Sleep stage 4", SleepStage::N3},
      {"Sleep stage R", SleepStage::Rem},
      {"Sleep stage ?", SleepStage::Excluded},
      {"Movement time", SleepStage::Excluded},
  };
  const auto it = table.find(label);
  if (it == table.end())
    raise(ErrorCode::UnknownStageLabel, "'" + std::string(label) + "'");
  return it->second;
}

Hypnogram expand_hypnogram(const std::vector<AnnotationEvent>& events,
                           double total_span_s) {
  Hypnogram hyp;
  const std::size_t n_epochs =
      total_span_s > 0 ? std::size_t(std::floor(total_span_s / kEpochSeconds)) : 0;
  hyp.stages.assign(n_epochs, SleepStage::Excluded);

  std::vector<bool> covered(n_epochs, false);
  for (const auto& ev : events) {
    if (ev.label.empty()) continue;  // timekeeping marker
    const SleepStage stage = stage_from_label(ev.label);
    const double onset = ev.onset_s;
    const double duration = ev.duration_s;
    if (onset < 0) raise(ErrorCode::MalformedTal, "negative event onset");
    const auto first = std::size_t(std::floor(onset / kEpochSeconds));
    auto count = std::size_t(std::floor(duration / kEpochSeconds));
    if (std::fmod(onset, kEpochSeconds) != 0.0 || std::fmod(duration, kEpochSeconds) != 0.0)
      ++hyp.floored_events;
    for (std::size_t e = first; e < first + count && e < n_epochs; ++e) {
      if (covered[e])
        raise(ErrorCode::OverlappingEvents,
              "epoch " + std::to_string(e) + " labelled twice");
      covered[e] = true;
      hyp.stages[e] = stage;
    }
  }
  return hyp;
}

EdfHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
  std::string fixed(kFixedHeaderBytes, '\0');
  in.read(fixed.data(), std::streamsize(fixed.size()));
  if (in.gcount() != std::streamsize(fixed.size()))
    raise(ErrorCode::TruncatedHeader, path.string() + " is shorter than 256 bytes");
  const long declared = std::strtol(fixed.substr(184, 8).c_str(), nullptr, 10);
  if (declared < long(kFixedHeaderBytes))
    raise(ErrorCode::InconsistentHeaderBytes, "declared header bytes " + std::to_string(declared));
  std::string rest(std::size_t(declared) - kFixedHeaderBytes, '\0');
  in.read(rest.data(), std::streamsize(rest.size()));
  if (in.gcount() != std::streamsize(rest.size()))
    raise(ErrorCode::TruncatedHeader, path.string() + " truncated inside signal block");
  return parse_header(fixed + rest);
}

}  // namespace somno::edf
