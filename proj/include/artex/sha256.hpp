#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "artex/common.hpp"

namespace artex {

Hash32 sha256(std::span<const std::uint8_t> data);
Hash32 sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

// Append-only byte buffer for building canonical preimages.
struct HashWriter {
    std::vector<std::uint8_t> buf;

    void bytes(std::span<const std::uint8_t> b) { buf.insert(buf.end(), b.begin(), b.end()); }
    void str(std::string_view s) {
        u64(s.size());
        buf.insert(buf.end(), s.begin(), s.end());
    }
    void u8(std::uint8_t v) { buf.push_back(v); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    Hash32 digest() const { return sha256(std::span<const std::uint8_t>(buf.data(), buf.size())); }
};

}  // namespace artex
