#pragma once

#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <string>
#include <vector>

namespace dnerv {

// Little-endian binary helpers shared by the checkpoint, .dnrv and .dnvc
// writers. Values are assembled byte by byte so the on-disk layout does not
// depend on host endianness.

void write_bytes(std::ostream& os, const void* p, std::size_t n);
void read_bytes(std::istream& is, void* p, std::size_t n, const char* what);

void write_u8(std::ostream& os, std::uint8_t v);
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);  // u32 length + bytes

std::uint8_t read_u8(std::istream& is, const char* what);
std::uint32_t read_u32(std::istream& is, const char* what);
std::uint64_t read_u64(std::istream& is, const char* what);
double read_f64(std::istream& is, const char* what);
std::string read_string(std::istream& is, const char* what);

// Same encoding against an in-memory buffer, used when a record has to be
// CRC-framed before it is appended to the container.
void put_u8(std::vector<std::uint8_t>& b, std::uint8_t v);
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& b, double v);
void put_string(std::vector<std::uint8_t>& b, const std::string& s);

class ByteReader {
public:
    ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    std::uint8_t u8(const char* what);
    std::uint32_t u32(const char* what);
    std::uint64_t u64(const char* what);
    double f64(const char* what);
    std::string str(const char* what);
    void raw(void* out, std::size_t n, const char* what);
    std::size_t remaining() const { return n_ - pos_; }

private:
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
std::uint32_t crc32(const void* data, std::size_t n, std::uint32_t seed = 0);

// FNV-1a 64-bit, used to fingerprint canonical config strings.
std::uint64_t fnv1a64(const std::string& s);

}  // namespace dnerv
