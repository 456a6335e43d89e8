#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "brp/errors.hpp"
#include "brp/matrix.hpp"

namespace brp {

static_assert(std::endian::native == std::endian::little,
              "raw_f64 files are little-endian; big-endian hosts are unsupported");

enum class MatrixFormat { matrix_market_array, csv, raw_f64 };

// A batch of same-size grayscale images, one flattened row-major image per
// matrix row, pixel values scaled to [0, 1].
struct ImageStack {
    Index count = 0;
    Index height = 0;
    Index width = 0;
    DenseMatrix as_matrix;
};

namespace detail {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Whole-file atomic write: stream into path + ".tmp", rename over the target
// on success, remove the temporary on any failure so no partial file is left.
template <typename Body>
void write_atomic(const std::string& path, bool binary, Body&& body) {
    namespace fs = std::filesystem;
    if (path.empty()) throw io_error("write: empty path");
    const std::string tmp = path + ".tmp";
    auto mode = std::ios::out | std::ios::trunc;
    if (binary) mode |= std::ios::binary;
    {
        std::ofstream out(tmp, mode);
        if (!out) throw io_error("write: cannot open " + tmp);
        try {
            body(out);
            out.flush();
        } catch (...) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw;
        }
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw io_error("write: stream failure on " + tmp);
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw io_error("write: cannot rename " + tmp + " to " + path + ": " +
                       ec.message());
    }
}

inline void reject_non_finite(const DenseMatrix& m, const std::string& where) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j)))
                throw parse_error(where + ": non-finite value at row " +
                                  std::to_string(i + 1) + ", column " +
                                  std::to_string(j + 1));
}

inline double parse_double(const std::string& token, const std::string& where) {
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw parse_error(where + ": cannot parse number '" + token + "'");
    return v;
}

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline DenseMatrix read_raw_f64(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read: cannot open " + path);
    std::uint64_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (in.gcount() != sizeof(dims))
        throw parse_error(path + ": truncated header at offset " +
                          std::to_string(in.gcount()));
    constexpr std::uint64_t sane = std::uint64_t(1) << 31;
    if (dims[0] == 0 || dims[1] == 0 || dims[0] > sane || dims[1] > sane)
        throw parse_error(path + ": implausible dimensions " +
                          std::to_string(dims[0]) + "x" + std::to_string(dims[1]));
    const Index rows = static_cast<Index>(dims[0]);
    const Index cols = static_cast<Index>(dims[1]);
    DenseMatrix m(rows, cols);
    const std::streamsize bytes =
        static_cast<std::streamsize>(sizeof(double)) * rows * cols;
    in.read(reinterpret_cast<char*>(m.data()), bytes);
    if (in.gcount() != bytes)
        throw parse_error(path + ": truncated payload at offset " +
                          std::to_string(16 + in.gcount()));
    reject_non_finite(m, path);
    return m;
}

inline void write_raw_f64(const DenseMatrix& m, const std::string& path) {
    write_atomic(path, true, [&](std::ofstream& out) {
        const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                       static_cast<std::uint64_t>(m.cols())};
        out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double)) * m.rows() * m.cols());
    });
}

inline DenseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read: cannot open " + path);
    std::string line;
    Index lineno = 0;
    if (!std::getline(in, line))
        throw parse_error(path + ": empty file");
    ++lineno;
    line = strip_cr(line);
    {
        std::istringstream banner(line);
        std::string tag, object, fmt, field, symmetry;
        banner >> tag >> object >> fmt >> field >> symmetry;
        if (tag != "%%MatrixMarket" || lowercase(object) != "matrix" ||
            lowercase(fmt) != "array" || lowercase(field) != "real" ||
            lowercase(symmetry) != "general")
            throw parse_error(path + ": line 1: expected banner "
                              "'%%MatrixMarket matrix array real general'");
    }
    Index rows = 0, cols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty() || line[0] == '%') continue;
        std::istringstream size(line);
        if (!(size >> rows >> cols) || rows < 1 || cols < 1)
            throw parse_error(path + ": line " + std::to_string(lineno) +
                              ": expected positive dimensions");
        std::string extra;
        if (size >> extra)
            throw parse_error(path + ": line " + std::to_string(lineno) +
                              ": trailing tokens after dimensions");
        break;
    }
    if (rows == 0)
        throw parse_error(path + ": missing size line");
    DenseMatrix m(rows, cols);
    const Index total = rows * cols;
    Index filled = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        std::istringstream vals(line);
        std::string token;
        while (vals >> token) {
            if (filled >= total)
                throw parse_error(path + ": line " + std::to_string(lineno) +
                                  ": more than " + std::to_string(total) +
                                  " entries");
            const double v = parse_double(
                token, path + ": line " + std::to_string(lineno));
            m(filled % rows, filled / rows) = v;  // array format is column-major
            ++filled;
        }
    }
    if (filled != total)
        throw parse_error(path + ": expected " + std::to_string(total) +
                          " entries, found " + std::to_string(filled));
    reject_non_finite(m, path);
    return m;
}

inline void write_matrix_market(const DenseMatrix& m, const std::string& path) {
    write_atomic(path, false, [&](std::ofstream& out) {
        out << "%%MatrixMarket matrix array real general\n";
        out << m.rows() << " " << m.cols() << "\n";
        for (Index j = 0; j < m.cols(); ++j)
            for (Index i = 0; i < m.rows(); ++i)
                out << format_g17(m(i, j)) << "\n";
    });
}

inline DenseMatrix read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    Index lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) {
            if (in.peek() == EOF) break;  // tolerate one trailing blank line
            throw parse_error(path + ": line " + std::to_string(lineno) +
                              ": blank line inside matrix");
        }
        const auto fields = split_fields(line, ',');
        if (width == 0) width = fields.size();
        if (fields.size() != width)
            throw parse_error(path + ": line " + std::to_string(lineno) +
                              ": expected " + std::to_string(width) +
                              " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(width);
        for (const auto& f : fields)
            row.push_back(
                parse_double(f, path + ": line " + std::to_string(lineno)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(path + ": empty file");
    DenseMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    reject_non_finite(m, path);
    return m;
}

inline void write_csv_matrix(const DenseMatrix& m, const std::string& path) {
    write_atomic(path, false, [&](std::ofstream& out) {
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) {
                if (j) out << ",";
                out << format_g17(m(i, j));
            }
            out << "\n";
        }
    });
}

} // namespace detail

/// Read a dense matrix in the given format.  raw_f64 is a 16-byte header of
/// row and column counts (64-bit little-endian) followed by row-major
/// doubles; the array text format stores entries column-major under the
/// banner '%%MatrixMarket matrix array real general'.  Non-finite entries
/// are rejected.
inline DenseMatrix read_matrix(const std::string& path, MatrixFormat format) {
    switch (format) {
        case MatrixFormat::raw_f64: return detail::read_raw_f64(path);
        case MatrixFormat::matrix_market_array: return detail::read_matrix_market(path);
        case MatrixFormat::csv: return detail::read_csv_matrix(path);
    }
    throw config_error("read_matrix: unknown format");
}

/// Write a dense matrix.  raw_f64 round-trips bit-exactly; the text formats
/// emit 17 significant digits so doubles survive a round trip to 1e-15
/// relative.  Writes are whole-file atomic.
inline void write_matrix(const DenseMatrix& m, const std::string& path,
                         MatrixFormat format) {
    if (m.rows() < 1 || m.cols() < 1)
        throw config_error("write_matrix: empty matrix");
    detail::require_finite(m, "write_matrix");
    switch (format) {
        case MatrixFormat::raw_f64: detail::write_raw_f64(m, path); return;
        case MatrixFormat::matrix_market_array:
            detail::write_matrix_market(m, path);
            return;
        case MatrixFormat::csv: detail::write_csv_matrix(m, path); return;
    }
    throw config_error("write_matrix: unknown format");
}

namespace detail {

inline Index parse_pgm_int(const std::string& token, const std::string& where) {
    if (token.empty() ||
        !std::all_of(token.begin(), token.end(), [](unsigned char c) {
            return std::isdigit(c);
        }))
        throw parse_error(where + ": expected integer, got '" + token + "'");
    return static_cast<Index>(std::stoll(token));
}

// Next PGM header token: skips whitespace and '#' comments.
inline std::string pgm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw parse_error(path + ": truncated header");
    return tok;
}

} // namespace detail

/// Read binary 8-bit PGM files into one row per image, pixels divided by
/// 255.  All files must be P5 with maxval 255 and identical dimensions.
inline ImageStack read_pgm_stack(const std::vector<std::string>& paths) {
    if (paths.empty()) throw io_error("read_pgm_stack: no input files");
    ImageStack stack;
    stack.count = static_cast<Index>(paths.size());
    std::vector<unsigned char> pixels;
    for (Index i = 0; i < stack.count; ++i) {
        const std::string& path = paths[static_cast<std::size_t>(i)];
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("read: cannot open " + path);
        const std::string magic = detail::pgm_token(in, path);
        if (magic != "P5")
            throw parse_error(path + ": expected binary PGM magic 'P5', got '" +
                              magic + "'");
        const Index w =
            detail::parse_pgm_int(detail::pgm_token(in, path), path + ": width");
        const Index h =
            detail::parse_pgm_int(detail::pgm_token(in, path), path + ": height");
        const Index maxval =
            detail::parse_pgm_int(detail::pgm_token(in, path), path + ": maxval");
        if (w < 1 || h < 1)
            throw parse_error(path + ": bad dimensions " + std::to_string(w) +
                              "x" + std::to_string(h));
        if (maxval != 255)
            throw parse_error(path + ": maxval must be 255, got " +
                              std::to_string(maxval));
        if (i == 0) {
            stack.width = w;
            stack.height = h;
            stack.as_matrix.resize(stack.count, w * h);
            pixels.resize(static_cast<std::size_t>(w * h));
        } else if (w != stack.width || h != stack.height) {
            throw parse_error(path + ": size " + std::to_string(w) + "x" +
                              std::to_string(h) + " differs from first image " +
                              std::to_string(stack.width) + "x" +
                              std::to_string(stack.height));
        }
        in.read(reinterpret_cast<char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size()));
        if (in.gcount() != static_cast<std::streamsize>(pixels.size()))
            throw parse_error(path + ": truncated pixel data");
        for (Index j = 0; j < stack.width * stack.height; ++j)
            stack.as_matrix(i, j) =
                static_cast<double>(pixels[static_cast<std::size_t>(j)]) / 255.0;
    }
    return stack;
}

/// Write every row of the stack as img_0000.pgm, img_0001.pgm, ... in `dir`.
/// Values are clamped to [0, 1], scaled by 255, and rounded half away from
/// zero, so a read/write round trip of 8-bit data is pixel-exact.
inline void write_pgm_stack(const ImageStack& stack, const std::string& dir) {
    if (stack.as_matrix.rows() != stack.count ||
        stack.as_matrix.cols() != stack.height * stack.width)
        throw shape_error("write_pgm_stack: matrix " +
                          detail::shape_of(stack.as_matrix) +
                          " does not match " + std::to_string(stack.count) +
                          " images of " + std::to_string(stack.width) + "x" +
                          std::to_string(stack.height));
    if (stack.count < 1) throw config_error("write_pgm_stack: empty stack");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("write: cannot create directory " + dir + ": " +
                           ec.message());
    std::vector<unsigned char> pixels(
        static_cast<std::size_t>(stack.height * stack.width));
    for (Index i = 0; i < stack.count; ++i) {
        for (Index j = 0; j < stack.height * stack.width; ++j) {
            double v = stack.as_matrix(i, j);
            v = std::min(std::max(v, 0.0), 1.0);
            pixels[static_cast<std::size_t>(j)] =
                static_cast<unsigned char>(std::lround(v * 255.0));
        }
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04lld.pgm",
                      static_cast<long long>(i));
        const std::string path = dir + "/" + name;
        detail::write_atomic(path, true, [&](std::ofstream& out) {
            out << "P5\n" << stack.width << " " << stack.height << "\n255\n";
            out.write(reinterpret_cast<const char*>(pixels.data()),
                      static_cast<std::streamsize>(pixels.size()));
        });
    }
}

// One CSV result row of an experiment run.
struct ExperimentRecord {
    std::string experiment;
    Index n = 0;
    Index m = 0;
    Index rank = 0;
    Index oversample = 0;
    Index q = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
    double wall_time_seconds = 0.0;
};

inline const char* records_csv_header() {
    return "experiment,n,m,rank,oversample,q,seed,metric,value,wall_time_seconds";
}

/// Emit experiment records with the fixed schema header, UTF-8, LF endings.
inline void write_records_csv(const std::vector<ExperimentRecord>& records,
                              const std::string& path) {
    static const std::vector<std::string> metrics = {
        "rel_fro_error", "rel_spec_error", "bound_det",
        "bound_avg",     "bound_dev",      "fail_prob"};
    for (const auto& r : records) {
        if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end())
            throw config_error("write_records_csv: unknown metric '" + r.metric +
                               "'");
        if (!(r.wall_time_seconds >= 0.0))
            throw config_error("write_records_csv: negative wall time");
    }
    detail::write_atomic(path, false, [&](std::ofstream& out) {
        out << records_csv_header() << "\n";
        for (const auto& r : records) {
            out << r.experiment << "," << r.n << "," << r.m << "," << r.rank << ","
                << r.oversample << "," << r.q << "," << r.seed << "," << r.metric
                << "," << detail::format_g17(r.value) << ","
                << detail::format_g17(r.wall_time_seconds) << "\n";
        }
    });
}

} // namespace brp
