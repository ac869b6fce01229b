#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace relaygate {

// Deterministic CSV emission: fixed "%.12g" float formatting, '.' decimal
// point, comma separator, header on the first row. Same inputs give
// byte-identical files.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& cols) { raw_row(cols); }

    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    }

    static std::string num(long long v) { return std::to_string(v); }
    static std::string num(int v) { return std::to_string(v); }

  private:
    std::ofstream out_;
};

} // namespace relaygate
