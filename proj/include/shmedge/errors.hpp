#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shmedge {

// Error classes map 1:1 onto CLI exit codes (see tools/shm-edge --help):
// parse=2, calibration=3, training=4, dimension/config mismatch=5.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (bad CSV record, bad binary header, bad config file).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line_or_offset)
        : Error(msg + " (at line/offset " + std::to_string(line_or_offset) + ")"),
          position(line_or_offset) {}
    explicit ParseError(const std::string& msg) : Error(msg), position(0) {}
    std::size_t position;
};

// Structurally valid input violating a value contract (NaN sample, bad range).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Out-of-contract call parameter (cutoff above Nyquist, non-divisible DWT length).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Operand length does not match the model or window dimension.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Not enough data to fit or calibrate.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Energy-threshold search failed; carries the RSNR trajectory seen so far.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& msg, std::vector<double> rsnr_trajectory)
        : Error(msg), trajectory(std::move(rsnr_trajectory)) {}
    std::vector<double> trajectory;
};

// Model training diverged; carries the loss trajectory.
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, std::vector<double> loss_trajectory)
        : Error(msg), trajectory(std::move(loss_trajectory)) {}
    std::vector<double> trajectory;
};

// Degenerate input that makes the requested transform meaningless.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Persistence problems: bad magic, version, or checksum.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace shmedge
