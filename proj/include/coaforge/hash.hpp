#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include <fmt/format.h>

namespace coaforge {

/// 64-bit FNV-1a, used for content fingerprints.
class Fnv1a {
public:
    Fnv1a& add(const void* data, std::size_t size)
    {
        auto p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& add(std::string_view s)
    {
        add(s.data(), s.size());
        return add("\0", 1);
    }
    Fnv1a& add(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        return add(&bits, sizeof bits);
    }
    Fnv1a& add(std::int64_t v) { return add(&v, sizeof v); }

    std::uint64_t value() const noexcept { return state_; }
    std::string hex() const { return fmt::format("{:016x}", state_); }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

} // namespace coaforge
