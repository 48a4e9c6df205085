#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace tgm {

/// Bit-faithful text encoding for doubles (C99 hex-float, e.g. "0x1.8p+1").
std::string to_hexfloat(double value);
double from_hexfloat(const std::string& text);

/// Write `contents` to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& contents);

/// Log level from TGM_LOG_LEVEL in {error, warn, info, debug}; default warn.
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };
LogLevel log_level();
void log_message(LogLevel level, const std::string& message);

/// 16-hex-digit digest of a string (FNV-1a), used to tag checkpoints with
/// the effective config.
std::string digest(const std::string& text);

}  // namespace tgm
