#ifndef PCGP_IO_UTIL_HPP
#define PCGP_IO_UTIL_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pcgp/field.hpp"

namespace pcgp {

// Little-endian binary primitives. All on-disk formats in this project are
// explicitly little-endian regardless of host order.

class ByteWriter {
public:
    explicit ByteWriter(std::ostream& os) : os_(os) {}
    void bytes(const void* p, std::size_t n);
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);

private:
    std::ostream& os_;
};

class ByteReader {
public:
    explicit ByteReader(std::istream& is) : is_(is) {}
    void bytes(void* p, std::size_t n);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::size_t offset() const { return offset_; }

private:
    std::istream& is_;
    std::size_t offset_ = 0;
};

/// Shortest decimal form that round-trips a double (printf %.17g).
std::string fmt17(double v);

/// Row-major field as CSV: ny lines of nx comma-separated values.
void write_field_csv(const std::string& path, const ScalarField& f);

/// Reads a numeric CSV grid; spacing is taken from the caller.
ScalarField read_field_csv(const std::string& path, double h);

/// 8-bit binary PGM with linear min-max scaling; the scaling is recorded in
/// `path + ".meta"` so the image is reproducible bit-exactly.
void write_field_pgm(const std::string& path, const ScalarField& f);

/// key=value file with '#' comments and blank lines. Preserves no order.
std::map<std::string, std::string> read_kv_file(const std::string& path);
void write_kv_file(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv);

} // namespace pcgp

#endif
