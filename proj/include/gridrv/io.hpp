#pragma once

// CSV output. Numbers use the shortest round-trip decimal form with '.' as
// separator; every file starts with a "# config=" line carrying the run
// configuration, then a header row.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "gridrv/config.hpp"
#include "gridrv/errors.hpp"
#include "gridrv/scheme.hpp"

namespace gridrv::io {

inline std::string num(double v)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string num(std::uint64_t v) { return std::to_string(v); }

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const json& provenance) : out_(file, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot write " + file.string());
        out_ << "# config=" << provenance.dump() << '\n';
    }

    template <class... Cols>
    CsvWriter& row(const Cols&... cols)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cols), first = false), ...);
        out_ << '\n';
        return *this;
    }

    /// Trailing "# key=value" line.
    CsvWriter& footer(std::string_view key, double value)
    {
        out_ << "# " << key << '=' << num(value) << '\n';
        return *this;
    }

    std::ostream& stream() { return out_; }

private:
    template <class T>
    static std::string cell(const T& v)
    {
        if constexpr (std::is_same_v<T, bool>) return v ? "1" : "0";
        else if constexpr (std::is_floating_point_v<T>) return num(static_cast<double>(v));
        else if constexpr (std::is_integral_v<T>) return std::to_string(v);
        else return std::string(v);
    }

    std::ofstream out_;
};

inline void ensure_directory(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

/// j, tau_j, X_{tau_j}, cause
inline void write_sampled_path(const std::filesystem::path& file, const SampledPath& s, const json& provenance)
{
    CsvWriter w(file, provenance);
    w.row("j", "tau", "x_tau", "cause");
    for (std::size_t j = 0; j < s.observations.size(); ++j) {
        const auto& o = s.observations[j];
        w.row(static_cast<std::uint64_t>(j), o.time, o.value, to_string(o.cause));
    }
}

/// p, S_p, dX_{S_p}, alpha(eps, p), observed
inline void write_overshoots(const std::filesystem::path& file, const SampledPath& s, const json& provenance)
{
    CsvWriter w(file, provenance);
    w.row("p", "s_p", "jump_size", "alpha", "observed");
    for (const auto& o : s.overshoots) {
        w.row(static_cast<std::uint64_t>(o.jump_index), o.time, o.jump_size, o.alpha, o.observed);
    }
}

} // namespace gridrv::io
