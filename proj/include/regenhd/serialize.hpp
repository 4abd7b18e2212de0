#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "regenhd/errors.hpp"

namespace regenhd {

// Little-endian binary checkpoint IO. Fixed byte order keeps files portable;
// readers validate magic + version and fail loudly on truncation.

class BinWriter {
public:
    explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw data_error("cannot open for writing: " + path);
    }

    void u32(std::uint32_t v) {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 4);
    }

    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 8);
    }

    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }

    void f64_array(const double* data, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) f64(data[i]);
    }

    void finish() {
        out_.flush();
        if (!out_) throw data_error("write failed: " + path_);
    }

private:
    void raw(const unsigned char* data, std::size_t n) {
        out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
    }

    std::string path_;
    std::ofstream out_;
};

class BinReader {
public:
    explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw data_error("cannot open for reading: " + path);
    }

    std::uint32_t u32() {
        unsigned char b[4];
        raw(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        unsigned char b[8];
        raw(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    void f64_array(double* data, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) data[i] = f64();
    }

    const std::string& path() const { return path_; }

private:
    void raw(unsigned char* data, std::size_t n) {
        in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw data_error("truncated or corrupt file: " + path_);
    }

    std::string path_;
    std::ifstream in_;
};

}  // namespace regenhd
