#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "detection.hpp"

namespace trapsim::io {

// FNV-1a 64-bit content checksum, hex encoded.
std::string fnv1a64_hex(const void* data, std::size_t size);
std::string fnv1a64_hex(const std::string& text);
std::string checksum_file(const std::filesystem::path& path);

// One value formatted with 12 significant digits.
std::string format_value(double v);

// Two-column CSV, LF line endings, 12 significant digits.
void write_trace_csv(const std::filesystem::path& path,
                     const bloch::PopulationTrace& trace,
                     const std::string& x_name = "time_s",
                     const std::string& y_name = "p0");

bloch::PopulationTrace read_trace_csv(const std::filesystem::path& path);

// 16-bit binary PGM (P5, big-endian samples), values clamped to [0, 65535].
void write_pgm16(const std::filesystem::path& path, const detection::Frame& frame);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace trapsim::io
