#include "shmedge/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shmedge/errors.hpp"

namespace shmedge {

namespace {

constexpr const char* kRateKey = "# sample_rate_hz=";

void validate_finite(const std::vector<double>& samples) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw ValidationError("non-finite sample at index " + std::to_string(i));
        }
    }
}

AccelTrace ingest_csv(std::istream& in, double sample_rate_hz) {
    AccelTrace trace;
    double header_rate = 0.0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind(kRateKey, 0) == 0) {
                try {
                    header_rate = std::stod(line.substr(std::strlen(kRateKey)));
                } catch (const std::exception&) {
                    throw ParseError("bad sample_rate_hz header", lineno);
                }
            }
            continue;
        }
        std::size_t consumed = 0;
        double v;
        try {
            v = std::stod(line, &consumed);
        } catch (const std::exception&) {
            throw ParseError("malformed sample record '" + line + "'", lineno);
        }
        // allow trailing whitespace only
        for (std::size_t i = consumed; i < line.size(); ++i) {
            if (!std::isspace(static_cast<unsigned char>(line[i]))) {
                throw ParseError("trailing garbage in record '" + line + "'", lineno);
            }
        }
        trace.samples.push_back(v);
    }
    trace.sample_rate_hz = sample_rate_hz > 0 ? sample_rate_hz : header_rate;
    if (trace.sample_rate_hz <= 0) {
        throw ParseError("no sample rate: pass one or add '" + std::string(kRateKey) + "<v>'");
    }
    validate_finite(trace.samples);
    return trace;
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    std::uint64_t u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    T out;
    if constexpr (std::is_same_v<T, float>) {
        std::uint32_t u32 = static_cast<std::uint32_t>(u);
        std::memcpy(&out, &u32, sizeof(float));
    } else {
        out = static_cast<T>(u);
    }
    return out;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    std::uint64_t u = 0;
    if constexpr (std::is_same_v<T, float>) {
        std::uint32_t u32;
        std::memcpy(&u32, &v, sizeof(float));
        u = u32;
    } else {
        u = static_cast<std::uint64_t>(static_cast<std::make_unsigned_t<T>>(v));
    }
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

AccelTrace ingest_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kTraceMagic, 4) != 0) {
        throw ParseError("bad trace magic (want SHM1)", 0);
    }
    const auto rate = read_le<std::uint32_t>(in);
    const float lsb_to_g = read_le<float>(in);
    read_le<std::uint32_t>(in);  // reserved
    if (!in) throw ParseError("truncated trace header", kTraceHeaderBytes);
    if (rate == 0) throw ValidationError("sample_rate_hz must be positive");
    if (!std::isfinite(lsb_to_g) || lsb_to_g <= 0) {
        throw ValidationError("lsb_to_g scale must be positive and finite");
    }

    AccelTrace trace;
    trace.sample_rate_hz = static_cast<double>(rate);
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() % 2 != 0) {
        throw ParseError("odd payload byte count", kTraceHeaderBytes + raw.size());
    }
    trace.samples.reserve(raw.size() / 2);
    for (std::size_t i = 0; i + 1 < raw.size(); i += 2) {
        const auto lo = static_cast<std::uint16_t>(static_cast<unsigned char>(raw[i]));
        const auto hi = static_cast<std::uint16_t>(static_cast<unsigned char>(raw[i + 1]));
        const auto s = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
        trace.samples.push_back(static_cast<double>(s) * static_cast<double>(lsb_to_g));
    }
    return trace;
}

}  // namespace

TraceFormat trace_format_from_string(const std::string& s) {
    if (s == "csv") return TraceFormat::csv;
    if (s == "bin" || s == "int16-binary" || s == "binary") return TraceFormat::int16_binary;
    throw ParameterError("unknown trace format '" + s + "'");
}

AccelTrace ingest_trace(std::istream& in, TraceFormat format, double sample_rate_hz) {
    if (format == TraceFormat::csv) {
        if (sample_rate_hz < 0) throw ParameterError("sample_rate_hz must be >= 0");
        return ingest_csv(in, sample_rate_hz);
    }
    return ingest_binary(in);
}

AccelTrace ingest_trace_file(const std::string& path, TraceFormat format, double sample_rate_hz) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trace file '" + path + "'");
    return ingest_trace(in, format, sample_rate_hz);
}

void write_trace(std::ostream& out, const AccelTrace& trace, TraceFormat format, double lsb_to_g) {
    if (format == TraceFormat::csv) {
        out << kRateKey << trace.sample_rate_hz << "\n";
        char buf[64];
        for (double v : trace.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", v);
            out << buf;
        }
        return;
    }
    if (lsb_to_g <= 0 || !std::isfinite(lsb_to_g)) {
        throw ParameterError("lsb_to_g must be positive and finite");
    }
    out.write(kTraceMagic, 4);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(std::lround(trace.sample_rate_hz)));
    write_le<float>(out, static_cast<float>(lsb_to_g));
    write_le<std::uint32_t>(out, 0);
    for (double v : trace.samples) {
        double q = std::round(v / lsb_to_g);
        q = std::clamp(q, -32768.0, 32767.0);
        write_le<std::int16_t>(out, static_cast<std::int16_t>(q));
    }
}

void write_trace_file(const std::string& path, const AccelTrace& trace, TraceFormat format,
                      double lsb_to_g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open output file '" + path + "'");
    write_trace(out, trace, format, lsb_to_g);
}

}  // namespace shmedge
