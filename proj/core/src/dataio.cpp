#include "gsgp/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace gsgp {

namespace {

[[noreturn]] void load_error(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("load " + path.string() + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_cells(std::string_view line, bool comma) {
    std::vector<std::string_view> cells;
    if (comma) {
        std::size_t start = 0;
        while (true) {
            const std::size_t at = line.find(',', start);
            if (at == std::string_view::npos) {
                cells.push_back(trim(line.substr(start)));
                break;
            }
            cells.push_back(trim(line.substr(start, at - start)));
            start = at + 1;
        }
    } else {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
                ++i;
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
            if (i > start) cells.push_back(line.substr(start, i - start));
        }
    }
    return cells;
}

bool parse_cell(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return res.ec == std::errc{} && res.ptr == cell.data() + cell.size() && std::isfinite(out);
}

}

dataset load(const std::filesystem::path& path, data_format format) {
    std::ifstream in(path);
    if (!in) load_error(path, "cannot open file");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) load_error(path, "empty file");

    bool comma = format == data_format::csv;
    if (format == data_format::autodetect)
        comma = lines.front().find(',') != std::string::npos;

    dataset ds;
    std::size_t columns = 0;
    std::size_t first_data_line = 0;

    { // a non-numeric cell anywhere in the first line marks it as a header
        const auto cells = split_cells(lines.front(), comma);
        if (cells.empty()) load_error(path, "row 1 is empty");
        double v;
        const bool numeric = std::all_of(cells.begin(), cells.end(),
                                         [&](std::string_view c) { return parse_cell(c, v); });
        columns = cells.size();
        if (!numeric) {
            first_data_line = 1;
            ds.names.reserve(cells.size());
            for (const auto c : cells) ds.names.emplace_back(c);
        }
    }
    if (columns < 2)
        load_error(path, "row 1 has " + std::to_string(columns) +
                             " column(s); need at least one feature and a target");

    ds.features = columns - 1;
    for (std::size_t li = first_data_line; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        const auto cells = split_cells(lines[li], comma);
        if (cells.size() != columns)
            load_error(path, "ragged row " + std::to_string(row) + ": has " +
                                 std::to_string(cells.size()) + " cell(s), expected " +
                                 std::to_string(columns));
        for (std::size_t c = 0; c < columns; ++c) {
            double v;
            if (!parse_cell(cells[c], v))
                load_error(path, "non-numeric cell at row " + std::to_string(row) +
                                     ", column " + std::to_string(c + 1) + ": '" +
                                     std::string(cells[c]) + "'");
            if (c + 1 == columns)
                ds.y.push_back(v);
            else
                ds.x.push_back(v);
        }
        ++ds.rows;
    }
    if (ds.rows < 2)
        load_error(path, "need at least 2 data rows, found " + std::to_string(ds.rows));
    return ds;
}

void save(const dataset& ds, const std::filesystem::path& path, data_format format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save " + path.string() + ": cannot open for writing");
    const char delim = format == data_format::csv ? ',' : ' ';
    if (!ds.names.empty()) {
        for (std::size_t i = 0; i < ds.names.size(); ++i) {
            if (i) out << delim;
            out << ds.names[i];
        }
        out << '\n';
    }
    char buf[40];
    const auto put = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
        out.write(buf, res.ptr - buf);
    };
    for (std::size_t r = 0; r < ds.rows; ++r) {
        for (std::size_t c = 0; c < ds.features; ++c) {
            if (c) out << delim;
            put(ds.x[r * ds.features + c]);
        }
        if (ds.features) out << delim;
        put(ds.y[r]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("save " + path.string() + ": write failed");
}

split_dataset split(const dataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    const std::size_t n = ds.rows;
    const auto train_n = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(n) + 0.5));
    if (train_n == 0 || train_n == n)
        throw std::invalid_argument("split: fraction " + std::to_string(fraction) +
                                    " leaves one side of a " + std::to_string(n) +
                                    "-row dataset empty");

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = std::uniform_int_distribution<std::size_t>(0, i)(rng);
        std::swap(perm[i], perm[j]);
    }

    const auto take = [&](std::size_t begin, std::size_t end) {
        dataset part;
        part.features = ds.features;
        part.names = ds.names;
        part.rows = end - begin;
        part.x.reserve(part.rows * ds.features);
        part.y.reserve(part.rows);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = perm[i];
            part.x.insert(part.x.end(), ds.x.begin() + static_cast<std::ptrdiff_t>(r * ds.features),
                          ds.x.begin() + static_cast<std::ptrdiff_t>((r + 1) * ds.features));
            part.y.push_back(ds.y[r]);
        }
        return part;
    };

    split_dataset out;
    out.train = take(0, train_n);
    out.test = take(train_n, n);
    out.seed = seed;
    out.fraction = fraction;
    return out;
}

}
