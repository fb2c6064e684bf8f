#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gsgp/expr.hpp"

namespace gsgp {

/// Numeric table with the target in the last column. Values are finite;
/// immutable once loaded and freely shared.
struct dataset {
    std::size_t rows = 0;
    std::size_t features = 0;
    std::vector<double> x;              // row-major, rows x features
    std::vector<double> y;              // rows
    std::vector<std::string> names;     // empty, or features + 1 labels (target last)

    case_matrix cases() const { return {x, rows, features}; }
};

enum class data_format : std::uint8_t { autodetect, csv, whitespace };

/// Loads a numeric text matrix. The delimiter is taken from the format, or
/// detected from the first line (a comma anywhere selects csv). A first line
/// with any non-numeric cell is treated as a header row. Ragged rows,
/// non-numeric or non-finite cells, fewer than two columns and fewer than
/// two data rows are errors citing the offending row and column.
dataset load(const std::filesystem::path& path, data_format format = data_format::autodetect);

/// Writes the dataset in the same shape load reads: optional header, one row
/// per line, 17 significant digits so reloading is bit-for-bit identical.
/// autodetect writes whitespace-delimited output.
void save(const dataset& ds, const std::filesystem::path& path,
          data_format format = data_format::autodetect);

struct split_dataset {
    dataset train;
    dataset test;
    std::uint64_t seed = 0;
    double fraction = 0.0;
};

/// Random train/test partition: a seeded uniform permutation of the rows,
/// with round(fraction * rows) rows (ties up) going to train. Requires
/// 0 < fraction < 1 and both sides non-empty.
split_dataset split(const dataset& ds, double fraction, std::uint64_t seed);

}
