#pragma once

#include <stdexcept>
#include <string>

namespace floodwatch {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-system level failures (open/read/write).
struct IoError : Error {
    using Error::Error;
};

// Malformed input bytes or documents (pcap, CSV, model files).
struct FormatError : Error {
    using Error::Error;
};

struct BadMagic : FormatError {
    using FormatError::FormatError;
};
struct UnsupportedFormat : FormatError {
    using FormatError::FormatError;
};
struct UnsupportedLinkType : FormatError {
    using FormatError::FormatError;
};
struct TruncatedHeader : FormatError {
    using FormatError::FormatError;
};
struct UnencodableRecord : FormatError {
    using FormatError::FormatError;
};
struct SchemaMismatch : FormatError {
    using FormatError::FormatError;
};
struct UnparseableNumber : FormatError {
    using FormatError::FormatError;
};
struct ModelFormatError : FormatError {
    using FormatError::FormatError;
};

// Per-frame decode failures; readers catch these and skip the frame.
struct DecodeError : Error {
    using Error::Error;
};

struct NonIPv4Frame : DecodeError {
    using DecodeError::DecodeError;
};
struct TruncatedFrame : DecodeError {
    using DecodeError::DecodeError;
};
struct BadIHL : DecodeError {
    using DecodeError::DecodeError;
};
struct FragmentedFrame : DecodeError {
    using DecodeError::DecodeError;
};

// Bad key/value configuration (scenario files, CLI flag combinations).
struct BadConfig : Error {
    using Error::Error;
};

// Caller violated an operation precondition.
struct InvalidArgument : Error {
    using Error::Error;
};

struct EmptyMatrix : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct LengthMismatch : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct NoDeviceTraffic : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct NoSuspect : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct ClassTooSmall : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct NotPositiveDefinite : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

// Model fitting failures.
struct TrainingError : Error {
    using Error::Error;
};

struct NonConvergence : TrainingError {
    using TrainingError::TrainingError;
};
struct DegenerateGram : TrainingError {
    using TrainingError::TrainingError;
};
struct TooFewSamples : TrainingError {
    using TrainingError::TrainingError;
};
struct SingleClassData : TrainingError {
    using TrainingError::TrainingError;
};
struct ContaminatedTrainingSet : TrainingError {
    using TrainingError::TrainingError;
};
struct SingularCovariance : TrainingError {
    using TrainingError::TrainingError;
};
struct DegenerateData : TrainingError {
    using TrainingError::TrainingError;
};

} // namespace floodwatch
