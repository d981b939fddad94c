#pragma once

#include "bst/tensor.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bst {

/// Text matrix format: header "rows cols", then row-major values.
inline void write_matrix_text(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << m.rows() << " " << m.cols() << "\n";
    char buf[40];
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            out << buf << (c + 1 < m.cols() ? " " : "\n");
        }
    }
}

inline Matrix read_matrix_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Index rows, cols;
    if (!(in >> rows >> cols) || rows < 1 || cols < 1)
        throw std::runtime_error("bad matrix header in " + path);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            if (!(in >> m(r, c))) throw std::runtime_error("truncated matrix in " + path);
    return m;
}

/// Binary matrix format: magic "BSTM", int64 rows and cols, then doubles in
/// column-major order.
inline void write_matrix_binary(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write("BSTM", 4);
    const std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}

inline Matrix read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "BSTM", 4) != 0) throw std::runtime_error("bad magic in " + path);
    std::int64_t rows, cols;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || rows < 1 || cols < 1) throw std::runtime_error("bad binary header in " + path);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    if (!in) throw std::runtime_error("truncated binary matrix in " + path);
    return m;
}

inline Matrix read_matrix(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    return std::memcmp(magic, "BSTM", 4) == 0 ? read_matrix_binary(path) : read_matrix_text(path);
}

/// Tensor format: header "n N_1 .. N_n", then values first mode fastest.
inline void write_tensor_text(const std::string& path, const DenseTensor& x) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << x.modes();
    for (Index n : x.shape()) out << " " << n;
    out << "\n";
    char buf[40];
    for (Index i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", x[i]);
        out << buf << (i + 1 < x.size() ? " " : "\n");
    }
}

inline DenseTensor read_tensor_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    int n;
    if (!(in >> n) || n < 1) throw std::runtime_error("bad tensor header in " + path);
    std::vector<Index> shape(n);
    for (int i = 0; i < n; ++i)
        if (!(in >> shape[i]) || shape[i] < 1)
            throw std::runtime_error("bad tensor shape in " + path);
    DenseTensor x(shape);
    for (Index i = 0; i < x.size(); ++i)
        if (!(in >> x[i])) throw std::runtime_error("truncated tensor in " + path);
    return x;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace bst
