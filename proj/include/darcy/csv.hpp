#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "darcy/errors.hpp"

namespace darcy {

/// Minimal CSV writer with fixed column order; all floats go through
/// fmt_double so files are byte-stable across runs and thread counts.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path), ncols_(columns.size()) {
        if (!out_) throw Error("cannot open '" + path + "' for writing");
        write_row(columns);
    }

    void write_row(const std::vector<std::string>& fields) {
        if (fields.size() != ncols_) throw SchemaMismatch("row width != header width");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
    std::size_t ncols_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

CsvTable read_csv(const std::string& path);

} // namespace darcy
