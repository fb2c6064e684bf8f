#include "gsgp/artifacts.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gsgp {

namespace {

[[noreturn]] void file_error(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
    file_error(path, "line " + std::to_string(line) + ": " + what);
}

std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::filesystem::path& path,
                    std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        line_error(path, line, "expected a number, got '" + std::string(token) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view token, const std::filesystem::path& path,
                        std::size_t line) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        line_error(path, line, "expected an integer, got '" + std::string(token) + "'");
    return v;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string t; in >> t;) out.push_back(std::move(t));
    return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) file_error(path, "cannot open for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) file_error(path, "cannot open");
    return in;
}

constexpr const char* trace_header = "generation,best_train_rmse,best_test_rmse,elapsed_ms";

}

void write_trace_csv(const std::filesystem::path& path, const run_trace& trace) {
    auto out = open_out(path);
    out << trace_header << '\n';
    for (const auto& rec : trace.records)
        out << rec.generation << ',' << fmt(rec.best_train_rmse) << ','
            << fmt(rec.best_test_rmse) << ',' << fmt(rec.elapsed_ms) << '\n';
    if (!out) file_error(path, "write failed");
}

run_trace read_trace_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != trace_header)
        file_error(path, "missing trace header '" + std::string(trace_header) + "'");
    run_trace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string_view, 4> cells;
        std::string_view rest = line;
        for (std::size_t i = 0; i < 4; ++i) {
            const std::size_t at = rest.find(',');
            if ((i < 3) != (at != std::string_view::npos))
                line_error(path, line_no, "expected 4 comma-separated cells");
            cells[i] = rest.substr(0, at);
            rest = at == std::string_view::npos ? std::string_view{} : rest.substr(at + 1);
        }
        trace_record rec;
        rec.generation = parse_u64(cells[0], path, line_no);
        rec.best_train_rmse = parse_double(cells[1], path, line_no);
        rec.best_test_rmse = parse_double(cells[2], path, line_no);
        rec.elapsed_ms = parse_double(cells[3], path, line_no);
        trace.records.push_back(rec);
    }
    if (trace.records.empty()) file_error(path, "no trace records");
    return trace;
}

void write_trees(const std::filesystem::path& path, std::span<const expr_ptr> trees) {
    auto out = open_out(path);
    for (const auto& t : trees) out << render(t) << '\n';
    if (!out) file_error(path, "write failed");
}

std::vector<expr_ptr> read_trees(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<expr_ptr> trees;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            trees.push_back(parse(line));
        } catch (const std::exception& e) {
            line_error(path, line_no, e.what());
        }
    }
    return trees;
}

void write_store(const std::filesystem::path& path, const ancestry_store& store) {
    auto out = open_out(path);
    for (const auto& e : store.entries()) {
        if (e.op == ancestry_op::crossover)
            out << e.child << " crossover " << e.parent1 << ' ' << e.parent2 << ' ' << e.rand1
                << '\n';
        else
            out << e.child << " mutation " << e.parent1 << ' ' << e.rand1 << ' ' << e.rand2 << ' '
                << fmt(e.ms) << '\n';
    }
    if (!out) file_error(path, "write failed");
}

ancestry_store read_store(const std::filesystem::path& path, std::uint64_t initial_count,
                          std::uint64_t pool_size) {
    auto in = open_in(path);
    ancestry_store store(initial_count);
    store.set_pool_size(pool_size);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tokens = tokenize(line);
        if (tokens.size() < 2) line_error(path, line_no, "truncated entry");
        const std::uint64_t child = parse_u64(tokens[0], path, line_no);
        if (child != store.next_id())
            line_error(path, line_no,
                       "child id " + std::to_string(child) + " out of order; expected " +
                           std::to_string(store.next_id()));
        try {
            if (tokens[1] == "crossover") {
                if (tokens.size() != 5)
                    line_error(path, line_no, "crossover entries take exactly 3 refs");
                store.record_crossover(parse_u64(tokens[2], path, line_no),
                                       parse_u64(tokens[3], path, line_no),
                                       parse_u64(tokens[4], path, line_no));
            } else if (tokens[1] == "mutation") {
                if (tokens.size() != 6)
                    line_error(path, line_no, "mutation entries take exactly 3 refs and ms");
                store.record_mutation(parse_u64(tokens[2], path, line_no),
                                      parse_u64(tokens[3], path, line_no),
                                      parse_u64(tokens[4], path, line_no),
                                      parse_double(tokens[5], path, line_no));
            } else {
                line_error(path, line_no, "unknown op '" + tokens[1] + "'");
            }
        } catch (const std::logic_error& e) {
            line_error(path, line_no, e.what());
        }
    }
    return store;
}

void write_meta(const std::filesystem::path& path, const run_meta& meta) {
    auto out = open_out(path);
    out << "method=" << meta.method << '\n'
        << "dataset=" << meta.dataset << '\n'
        << "pop_size=" << meta.pop_size << '\n'
        << "generations=" << meta.generations << '\n'
        << "xo_rate=" << fmt(meta.xo_rate) << '\n'
        << "mut_rate=" << fmt(meta.mut_rate) << '\n'
        << "ms=" << fmt(meta.ms) << '\n'
        << "tournament_size=" << meta.tournament_size << '\n'
        << "max_init_depth=" << meta.max_init_depth << '\n'
        << "random_tree_depth=" << meta.random_tree_depth << '\n'
        << "sigmoid_on_crossover=" << (meta.sigmoid_on_crossover ? 1 : 0) << '\n'
        << "sigmoid_on_mutation=" << (meta.sigmoid_on_mutation ? 1 : 0) << '\n'
        << "elitism=" << (meta.elitism ? 1 : 0) << '\n'
        << "split_fraction=" << fmt(meta.split_fraction) << '\n'
        << "split_seed=" << meta.split_seed << '\n'
        << "engine_seed=" << meta.engine_seed << '\n'
        << "best_ref=" << meta.best_ref << '\n'
        << "final_train_rmse=" << fmt(meta.final_train_rmse) << '\n'
        << "final_test_rmse=" << fmt(meta.final_test_rmse) << '\n'
        << "pool_size=" << meta.pool_size << '\n'
        << "store_size=" << meta.store_size << '\n'
        << "version=" << meta.version << '\n';
    if (!out) file_error(path, "write failed");
}

run_meta read_meta(const std::filesystem::path& path) {
    auto in = open_in(path);
    run_meta meta;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) line_error(path, line_no, "expected key=value");
        const std::string_view key = std::string_view(line).substr(0, eq);
        const std::string_view value = std::string_view(line).substr(eq + 1);
        const auto u64 = [&] { return parse_u64(value, path, line_no); };
        const auto real = [&] { return parse_double(value, path, line_no); };
        if (key == "method") meta.method = value;
        else if (key == "dataset") meta.dataset = value;
        else if (key == "pop_size") meta.pop_size = u64();
        else if (key == "generations") meta.generations = u64();
        else if (key == "xo_rate") meta.xo_rate = real();
        else if (key == "mut_rate") meta.mut_rate = real();
        else if (key == "ms") meta.ms = real();
        else if (key == "tournament_size") meta.tournament_size = u64();
        else if (key == "max_init_depth") meta.max_init_depth = static_cast<int>(u64());
        else if (key == "random_tree_depth") meta.random_tree_depth = static_cast<int>(u64());
        else if (key == "sigmoid_on_crossover") meta.sigmoid_on_crossover = u64() != 0;
        else if (key == "sigmoid_on_mutation") meta.sigmoid_on_mutation = u64() != 0;
        else if (key == "elitism") meta.elitism = u64() != 0;
        else if (key == "split_fraction") meta.split_fraction = real();
        else if (key == "split_seed") meta.split_seed = u64();
        else if (key == "engine_seed") meta.engine_seed = u64();
        else if (key == "best_ref") meta.best_ref = u64();
        else if (key == "final_train_rmse") meta.final_train_rmse = real();
        else if (key == "final_test_rmse") meta.final_test_rmse = real();
        else if (key == "pool_size") meta.pool_size = u64();
        else if (key == "store_size") meta.store_size = u64();
        else if (key == "version") meta.version = value;
        // unknown keys are ignored so older readers tolerate newer writers
    }
    if (meta.pop_size == 0) file_error(path, "missing or zero pop_size");
    return meta;
}

void write_run_artifacts(const std::filesystem::path& stem, const run_meta& meta,
                         std::span<const expr_ptr> initial, std::span<const expr_ptr> pool,
                         const ancestry_store& store) {
    auto with = [&](const char* suffix) {
        std::filesystem::path p = stem;
        p += suffix;
        return p;
    };
    write_meta(with(".meta.txt"), meta);
    write_trees(with(".pop.txt"), initial);
    write_trees(with(".pool.txt"), pool);
    write_store(with(".store.txt"), store);
}

run_artifacts load_run_artifacts(const std::filesystem::path& stem) {
    auto with = [&](const char* suffix) {
        std::filesystem::path p = stem;
        p += suffix;
        return p;
    };
    run_meta meta = read_meta(with(".meta.txt"));
    std::vector<expr_ptr> initial = read_trees(with(".pop.txt"));
    if (initial.size() != meta.pop_size)
        file_error(with(".pop.txt"), "expected " + std::to_string(meta.pop_size) +
                                         " trees per the meta file, found " +
                                         std::to_string(initial.size()));
    std::vector<expr_ptr> pool = read_trees(with(".pool.txt"));
    if (pool.size() != meta.pool_size)
        file_error(with(".pool.txt"), "expected " + std::to_string(meta.pool_size) +
                                          " trees per the meta file, found " +
                                          std::to_string(pool.size()));
    ancestry_store store = read_store(with(".store.txt"), meta.pop_size, pool.size());
    if (store.size() != meta.store_size)
        file_error(with(".store.txt"), "expected " + std::to_string(meta.store_size) +
                                           " entries per the meta file, found " +
                                           std::to_string(store.size()));
    if (!store.contains(meta.best_ref))
        file_error(with(".meta.txt"),
                   "best_ref " + std::to_string(meta.best_ref) + " not covered by the store");
    return {std::move(meta), std::move(initial), std::move(pool), std::move(store)};
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, curve_summary>>& methods) {
    if (methods.empty()) throw std::invalid_argument("write_summary_csv: no methods");
    const std::size_t generations = methods.front().second.generations();
    for (const auto& [name, curves] : methods)
        if (curves.generations() != generations)
            throw std::invalid_argument("write_summary_csv: method '" + name +
                                        "' covers a different generation count");
    auto out = open_out(path);
    out << "generation";
    for (const auto& [name, curves] : methods)
        out << ',' << name << "_median_train," << name << "_median_test";
    out << '\n';
    for (std::size_t g = 0; g < generations; ++g) {
        out << g;
        for (const auto& [name, curves] : methods)
            out << ',' << fmt(curves.median_train[g]) << ',' << fmt(curves.median_test[g]);
        out << '\n';
    }
    if (!out) file_error(path, "write failed");
}

void write_boxes_csv(const std::filesystem::path& path, const std::vector<labeled_box>& boxes) {
    auto out = open_out(path);
    out << "method,metric,min,q1,median,q3,max,whisker_low,whisker_high,outliers\n";
    for (const auto& b : boxes) {
        out << b.method << ',' << b.metric << ',' << fmt(b.box.min) << ',' << fmt(b.box.q1)
            << ',' << fmt(b.box.median) << ',' << fmt(b.box.q3) << ',' << fmt(b.box.max) << ','
            << fmt(b.box.whisker_low) << ',' << fmt(b.box.whisker_high) << ',';
        for (std::size_t i = 0; i < b.box.outliers.size(); ++i) {
            if (i) out << ';';
            out << fmt(b.box.outliers[i]);
        }
        out << '\n';
    }
    if (!out) file_error(path, "write failed");
}

}
