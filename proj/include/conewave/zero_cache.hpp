#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <iterator>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "special_fn.hpp"

namespace conewave {

struct ZeroTriple {
    double nu;
    int m;
    double j;
};

// Consecutive zeros j_{nu,1..n} per order, persisted as
// "CWZ1" | u64 count | count x (f64 nu, f64 m, f64 j) | u64 FNV-1a
class ZeroCache {
public:
    // zeros of J_nu up to and including the first one above xmax
    const std::vector<double>& row_through(double nu, double xmax)
    {
        auto& row = rows_[key(nu)];
        if (row.empty() || row.back() <= xmax) {
            ++misses_;
            extend_bessel_zeros(nu, row, SIZE_MAX, xmax);
        } else {
            ++hits_;
        }
        return row;
    }

    std::vector<double> zeros_below(double nu, double xmax)
    {
        const auto& row = row_through(nu, xmax);
        std::vector<double> out;
        for (double j : row)
            if (j <= xmax)
                out.push_back(j);
        return out;
    }

    double zero(double nu, int m)
    {
        if (m < 1)
            throw std::domain_error("ZeroCache::zero: index must be positive");
        auto& row = rows_[key(nu)];
        if (row.size() < static_cast<std::size_t>(m)) {
            ++misses_;
            extend_bessel_zeros(nu, row, static_cast<std::size_t>(m), INFINITY);
        } else {
            ++hits_;
        }
        return row[m - 1];
    }

    std::vector<ZeroTriple> triples() const
    {
        std::vector<ZeroTriple> out;
        for (const auto& [k, row] : rows_)
            for (std::size_t i = 0; i < row.size(); ++i)
                out.push_back({std::bit_cast<double>(k), static_cast<int>(i + 1), row[i]});
        return out;
    }

    std::size_t size() const
    {
        std::size_t n = 0;
        for (const auto& kv : rows_)
            n += kv.second.size();
        return n;
    }

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }

    void store(const std::string& path) const
    {
        std::string buf("CWZ1");
        const auto tr = triples();
        put_u64(buf, tr.size());
        for (const auto& t : tr) {
            put_f64(buf, t.nu);
            put_f64(buf, static_cast<double>(t.m));
            put_f64(buf, t.j);
        }
        put_u64(buf, fnv1a(buf));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("zero cache: cannot open " + path + " for writing");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out)
            throw ConfigError("zero cache: write failed for " + path);
    }

    static ZeroCache load(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("zero cache: cannot open " + path);
        std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (buf.size() < 20 || buf.compare(0, 4, "CWZ1") != 0)
            throw ChecksumError("zero cache: bad header in " + path);
        const std::uint64_t n = get_u64(buf, 4);
        const std::size_t body = 12 + 24 * n;
        if (n > (buf.size() / 24) || buf.size() != body + 8)
            throw ChecksumError("zero cache: truncated file " + path);
        if (get_u64(buf, body) != fnv1a(std::string_view(buf).substr(0, body)))
            throw ChecksumError("zero cache: checksum mismatch in " + path);

        ZeroCache c;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double nu = get_f64(buf, 12 + 24 * i);
            const double m = get_f64(buf, 12 + 24 * i + 8);
            const double j = get_f64(buf, 12 + 24 * i + 16);
            auto& row = c.rows_[key(nu)];
            if (m != static_cast<double>(row.size() + 1))
                throw ChecksumError("zero cache: non-consecutive radial index in " + path);
            row.push_back(j);
        }
        return c;
    }

    // a corrupt or missing file yields an empty cache; `rebuilt` reports it
    static ZeroCache load_or_empty(const std::string& path, bool& rebuilt)
    {
        try {
            rebuilt = false;
            return load(path);
        } catch (const std::exception&) {
            rebuilt = true;
            return ZeroCache{};
        }
    }

private:
    static std::uint64_t key(double nu) { return std::bit_cast<std::uint64_t>(nu); }

    static std::uint64_t fnv1a(std::string_view s)
    {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    static void put_u64(std::string& b, std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    static void put_f64(std::string& b, double x) { put_u64(b, std::bit_cast<std::uint64_t>(x)); }

    static std::uint64_t get_u64(const std::string& b, std::size_t off)
    {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
        return v;
    }
    static double get_f64(const std::string& b, std::size_t off)
    {
        return std::bit_cast<double>(get_u64(b, off));
    }

    std::map<std::uint64_t, std::vector<double>> rows_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

} // namespace conewave
