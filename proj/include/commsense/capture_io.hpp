#pragma once

#include <filesystem>
#include <string>

#include "commsense/pca_classify.hpp"
#include "commsense/types.hpp"

namespace commsense {

inline constexpr int kCaptureFormatVersion = 1;
inline constexpr int kIqFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

/// Text capture file. See docs/FORMATS.md.
void write_capture(const std::filesystem::path& path, const CaptureDataset& dataset);
CaptureDataset read_capture(const std::filesystem::path& path);

/// Binary IQ file: little-endian header, float32 interleaved I/Q body.
void write_iq(const std::filesystem::path& path, const IQStream& stream);
IQStream read_iq(const std::filesystem::path& path);

void write_classifier(const std::filesystem::path& path, const CentroidClassifier& classifier);
CentroidClassifier read_classifier(const std::filesystem::path& path);

/// Current time as an ISO-8601 UTC string, e.g. 2026-10-15T12:00:00Z.
std::string utc_timestamp_now();

}  // namespace commsense
