#include "pcgp/io_util.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcgp/errors.hpp"

namespace pcgp {

void ByteWriter::bytes(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void ByteWriter::u8(std::uint8_t v) { bytes(&v, 1); }

void ByteWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
}

void ByteWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
}

void ByteWriter::f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
}

void ByteReader::bytes(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n)
        throw FormatError("unexpected end of file", offset_ + static_cast<std::size_t>(is_.gcount()));
    offset_ += n;
}

std::uint8_t ByteReader::u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
}

std::uint32_t ByteReader::u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::uint64_t ByteReader::u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double ByteReader::f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_csv(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    for (int i = 0; i < f.ny; ++i) {
        for (int j = 0; j < f.nx; ++j) {
            if (j) os << ',';
            os << fmt17(f.at(i, j));
        }
        os << '\n';
    }
    if (!os.good()) throw NumericalError("write failed: " + path);
}

ScalarField read_field_csv(const std::string& path, double h) {
    std::ifstream is(path);
    if (!is) throw NumericalError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("bad numeric cell '" + cell + "' in " + path, 0);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged CSV rows in " + path, 0);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("empty CSV " + path, 0);
    ScalarField f(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), h);
    for (int i = 0; i < f.ny; ++i)
        for (int j = 0; j < f.nx; ++j) f.at(i, j) = rows[i][j];
    return f;
}

void write_field_pgm(const std::string& path, const ScalarField& f) {
    const auto [mn_it, mx_it] = std::minmax_element(f.values.begin(), f.values.end());
    const double mn = *mn_it, mx = *mx_it;
    const double scale = (mx > mn) ? 255.0 / (mx - mn) : 0.0;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    os << "P5\n" << f.nx << ' ' << f.ny << "\n255\n";
    for (int i = 0; i < f.ny; ++i)
        for (int j = 0; j < f.nx; ++j) {
            const double t = (f.at(i, j) - mn) * scale;
            const int q = static_cast<int>(t + 0.5);
            os.put(static_cast<char>(std::clamp(q, 0, 255)));
        }
    if (!os.good()) throw NumericalError("write failed: " + path);

    write_kv_file(path + ".meta", {{"min", fmt17(mn)}, {"max", fmt17(mx)}});
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw NumericalError("cannot open: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("missing '=' on line " + std::to_string(lineno) + " of " + path, 0);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void write_kv_file(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream os(path);
    if (!os) throw NumericalError("cannot open for writing: " + path);
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
    if (!os.good()) throw NumericalError("write failed: " + path);
}

} // namespace pcgp
