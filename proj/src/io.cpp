#include "io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace trapsim::io {

std::string fnv1a64_hex(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fnv1a64_hex(const std::string& text) {
    return fnv1a64_hex(text.data(), text.size());
}

std::string checksum_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for checksum");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64_hex(buf.str());
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

void write_trace_csv(const std::filesystem::path& path,
                     const bloch::PopulationTrace& trace, const std::string& x_name,
                     const std::string& y_name) {
    if (trace.times.size() != trace.p0.size()) {
        throw InvalidArgument("write_trace_csv: ragged trace");
    }
    std::string out;
    out.reserve(trace.times.size() * 42 + 32);
    out += x_name;
    out += ',';
    out += y_name;
    out += '\n';
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        out += format_value(trace.times[i]);
        out += ',';
        out += format_value(trace.p0[i]);
        out += '\n';
    }
    write_text_file(path, out);
}

bloch::PopulationTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace CSV '" + path.string() + "'");
    bloch::PopulationTrace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && !line.empty() &&
            !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' ||
              line[0] == '+' || line[0] == '.')) {
            continue; // header row
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected two comma-separated columns");
        }
        try {
            std::size_t used = 0;
            const double x = std::stod(line.substr(0, comma), &used);
            const double y = std::stod(line.substr(comma + 1), &used);
            trace.times.push_back(x);
            trace.p0.push_back(y);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": malformed numeric value");
        }
    }
    if (trace.times.empty()) {
        throw ConfigError(path.string() + ": no data rows");
    }
    return trace;
}

void write_pgm16(const std::filesystem::path& path, const detection::Frame& frame) {
    const auto& g = frame.geometry;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << g.width << " " << g.height << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(g.width) * 2);
    for (int iy = 0; iy < g.height; ++iy) {
        for (int ix = 0; ix < g.width; ++ix) {
            const double v = std::clamp(std::round(frame.at(ix, iy)), 0.0, 65535.0);
            const auto s = static_cast<std::uint16_t>(v);
            row[static_cast<std::size_t>(ix) * 2] = static_cast<unsigned char>(s >> 8);
            row[static_cast<std::size_t>(ix) * 2 + 1] = static_cast<unsigned char>(s & 0xFF);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError("short write on '" + path.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write on '" + path.string() + "'");
}

} // namespace trapsim::io
