#pragma once

#include <iosfwd>
#include <string>

#include "shmedge/types.hpp"

namespace shmedge {

enum class TraceFormat : std::uint8_t { csv, int16_binary };

TraceFormat trace_format_from_string(const std::string& s);

/// Binary trace header: magic "SHM1", u32 sample_rate_hz, f32 lsb_to_g,
/// u32 reserved (zero), then little-endian int16 samples.
inline constexpr char kTraceMagic[4] = {'S', 'H', 'M', '1'};
inline constexpr std::size_t kTraceHeaderBytes = 16;

/// Parse a trace from a stream.
///
/// CSV: one sample per line; blank lines ignored; an optional
/// `# sample_rate_hz=<v>` comment declares the rate. An explicit
/// `sample_rate_hz` argument > 0 takes precedence over the header.
/// Binary: rate and scale come from the file header; the argument is
/// ignored. Non-finite samples are rejected.
AccelTrace ingest_trace(std::istream& in, TraceFormat format, double sample_rate_hz = 0.0);
AccelTrace ingest_trace_file(const std::string& path, TraceFormat format,
                             double sample_rate_hz = 0.0);

/// Inverse of ingest: CSV carries the rate as a header comment; binary
/// quantizes samples with the given LSB scale (clamped to int16 range).
void write_trace(std::ostream& out, const AccelTrace& trace, TraceFormat format,
                 double lsb_to_g = 1.0e-4);
void write_trace_file(const std::string& path, const AccelTrace& trace, TraceFormat format,
                      double lsb_to_g = 1.0e-4);

}  // namespace shmedge
