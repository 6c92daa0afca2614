#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <string>

namespace fcml {

/// Packed on/off states of the N−1 switch pairs. Index 0 is switch 1.
class SwitchSet {
public:
    constexpr SwitchSet() = default;
    constexpr explicit SwitchSet(int size, std::uint64_t bits = 0) : bits_(bits & mask(size)), size_(size) {}

    static SwitchSet from_list(std::initializer_list<int> states) {
        SwitchSet s(static_cast<int>(states.size()));
        int i = 0;
        for (int v : states) s.set(i++, v != 0);
        return s;
    }

    static constexpr SwitchSet all_on(int size) { return SwitchSet(size, ~std::uint64_t{0}); }

    constexpr int size() const { return size_; }
    constexpr std::uint64_t bits() const { return bits_; }
    constexpr bool operator[](int i) const { return (bits_ >> i) & 1u; }
    constexpr int popcount() const { return std::popcount(bits_); }
    constexpr bool none() const { return bits_ == 0; }
    constexpr bool full() const { return bits_ == mask(size_); }

    constexpr void set(int i, bool on) {
        assert(i >= 0 && i < size_);
        if (on) bits_ |= std::uint64_t{1} << i;
        else bits_ &= ~(std::uint64_t{1} << i);
    }

    /// Element k of the result is element k−1 of *this, with wrap from the last index.
    constexpr SwitchSet rotated_up() const {
        if (size_ == 0) return *this;
        const std::uint64_t top = (bits_ >> (size_ - 1)) & 1u;
        return SwitchSet(size_, (bits_ << 1) | top);
    }

    constexpr SwitchSet operator|(SwitchSet o) const { return SwitchSet(size_, bits_ | o.bits_); }
    constexpr SwitchSet operator^(SwitchSet o) const { return SwitchSet(size_, bits_ ^ o.bits_); }
    constexpr SwitchSet operator&(SwitchSet o) const { return SwitchSet(size_, bits_ & o.bits_); }
    constexpr bool operator==(const SwitchSet&) const = default;

    /// True when the asserted bits form a single run under circular indexing.
    /// Empty and full sets count as contiguous.
    constexpr bool circularly_contiguous() const {
        if (none() || full()) return true;
        // Count 0->1 boundaries walking around the ring.
        int starts = 0;
        for (int i = 0; i < size_; ++i) {
            const int prev = (i + size_ - 1) % size_;
            if ((*this)[i] && !(*this)[prev]) ++starts;
        }
        return starts == 1;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(size_));
        for (int i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
        return s;
    }

private:
    static constexpr std::uint64_t mask(int size) {
        return size >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << size) - 1);
    }

    std::uint64_t bits_ = 0;
    int size_ = 0;
};

}  // namespace fcml
