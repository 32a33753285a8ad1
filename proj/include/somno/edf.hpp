#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "somno/types.hpp"

namespace somno::edf {

struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dim;  // "uV" for EEG channels
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  std::string prefiltering;
  int samples_per_record = 0;
  std::string reserved;
};

struct StartDateTime {
  int year = 1985, month = 1, day = 1;
  int hour = 0, minute = 0, second = 0;
};

struct EdfHeader {
  std::string version;       // 8-char field, "0" for EDF/EDF+
  std::string patient_id;
  std::string recording_id;
  StartDateTime start;
  std::string reserved;      // carries "EDF+C"/"EDF+D" for EDF+ files
  long header_bytes = 0;
  long n_records = 0;        // -1 means unknown until the data region is scanned
  double record_duration_s = 0.0;
  int n_signals = 0;
  std::vector<SignalSpec> signals;

  long record_size_bytes() const;
  double total_span_s() const { return double(n_records) * record_duration_s; }
  int signal_index(std::string_view label) const;  // -1 when absent
};

struct AnnotationEvent {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string label;
};

// Parses the fixed 256-byte header plus the 256-bytes-per-signal block.
// Consumes exactly header_bytes bytes of the input.
EdfHeader parse_header(std::string_view bytes);

// Inverse of parse_header for well-formed headers; emits the canonical
// left-aligned space-padded field layout.
std::string serialize_header(const EdfHeader& header);

// Reads one channel and applies the EDF digital-to-physical calibration:
//   phys = (dig - dig_min) * (phys_max - phys_min) / (dig_max - dig_min) + phys_min
// A header with n_records == -1 is resolved by scanning the stream size.
SignalTrace read_signal(std::istream& in, const EdfHeader& header,
                        std::string_view channel);
SignalTrace read_signal(const std::filesystem::path& path,
                        const EdfHeader& header, std::string_view channel);

// Extracts every TAL event in file order from the "EDF Annotations" signal.
std::vector<AnnotationEvent> parse_annotations(std::istream& in,
                                               const EdfHeader& header);
std::vector<AnnotationEvent> parse_annotations(const std::filesystem::path& path,
                                               const EdfHeader& header);

// Decodes one TAL byte stream (the contents of a single data record).
// Exposed separately so malformed-stream handling is directly testable.
std::vector<AnnotationEvent> parse_tal_stream(std::string_view bytes);

// Sleep-EDF label table; "Sleep stage 4" folds into N3, movement and
// unscored epochs map to Excluded. Anything else raises UnknownStageLabel.
SleepStage stage_from_label(std::string_view label);

// Expands stage events into one label per 30 s epoch over [0, total_span_s).
// Gaps are Excluded; overlapping events are an error; durations that are not
// whole multiples of 30 s are floored and counted in Hypnogram::floored_events.
Hypnogram expand_hypnogram(const std::vector<AnnotationEvent>& events,
                           double total_span_s);

// Parses just the header of an EDF file on disk.
EdfHeader read_header(const std::filesystem::path& path);

}  // namespace somno::edf
