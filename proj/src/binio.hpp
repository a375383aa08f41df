#pragma once

// Little-endian binary I/O helpers shared by the dataset and checkpoint
// formats. Payload bytes are folded into an FNV-1a digest as they are
// written/read so single-bit corruption is detected.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "kdlab/errors.hpp"

namespace kdlab::binio {

struct Digest {
    std::uint64_t h = 1469598103934665603ull;
    void feed(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    }
};

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot open for writing: " + path);
        path_ = path;
    }

    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        digest_.feed(p, n);
    }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void i32(std::int32_t v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void doubles(const double* p, std::size_t n) { bytes(p, n * sizeof(double)); }

    // Appends the digest of everything written so far and closes.
    void finish() {
        const std::uint64_t d = digest_.h;
        out_.write(reinterpret_cast<const char*>(&d), sizeof d);
        out_.close();
        if (!out_) throw DataError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
    Digest digest_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw DataError("cannot open: " + path);
    }

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw DataError("truncated file: " + path_);
        digest_.feed(p, n);
    }
    std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
    std::int32_t i32() { std::int32_t v; bytes(&v, sizeof v); return v; }
    double f64() { double v; bytes(&v, sizeof v); return v; }
    std::string str(std::size_t max_len = 1 << 20) {
        const std::uint64_t n = u64();
        if (n > max_len) throw DataError("string length out of bounds in " + path_);
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    void doubles(double* p, std::size_t n) { bytes(p, n * sizeof(double)); }

    // Verifies the trailing digest against what was read.
    void finish() {
        const std::uint64_t expected = digest_.h;
        std::uint64_t stored = 0;
        in_.read(reinterpret_cast<char*>(&stored), sizeof stored);
        if (in_.gcount() != sizeof stored) throw DataError("missing digest: " + path_);
        if (stored != expected) throw DataError("digest mismatch (corrupt file): " + path_);
    }

private:
    std::ifstream in_;
    std::string path_;
    Digest digest_;
};

}  // namespace kdlab::binio
