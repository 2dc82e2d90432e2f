// Copyright (c) 2026 The heights authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// LAS 1.2-1.4 point cloud reading and writing, point formats 0-3.
//
// Coordinates are stored in the file as 32-bit integers and de-quantized as
// raw * scale + offset. No VLR interpretation and no LAZ; VLRs are skipped by
// seeking to the point data offset.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "heights/detail/bytes.hpp"
#include "heights/error.hpp"

namespace heights::las {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Rgb {
    std::uint16_t r = 0;
    std::uint16_t g = 0;
    std::uint16_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

// One LiDAR return. Coordinates are CRS linear units, taken to be meters.
struct PointRecord {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    std::uint16_t intensity = 0;
    std::uint8_t classification = 0;
    std::optional<Rgb> color;
    std::optional<std::uint16_t> nir;

    friend bool operator==(const PointRecord&, const PointRecord&) = default;
};

struct LasHeader {
    std::array<char, 4> signature{};
    std::uint8_t version_major = 1;
    std::uint8_t version_minor = 2;
    std::uint16_t header_size = 0;
    std::uint32_t point_data_offset = 0;
    std::uint32_t vlr_count = 0;
    std::uint8_t point_format_id = 0;
    std::uint16_t point_record_length = 0;
    std::uint64_t point_count = 0;
    Vec3 scale{1.0, 1.0, 1.0};
    Vec3 offset;
    Vec3 bbox_min;
    Vec3 bbox_max;

    bool has_color() const noexcept { return point_format_id == 2 || point_format_id == 3; }
    bool has_gps_time() const noexcept { return point_format_id == 1 || point_format_id == 3; }
};

namespace layout {

inline constexpr std::size_t kHeaderSize12 = 227;
inline constexpr std::size_t kHeaderSize13 = 235;
inline constexpr std::size_t kHeaderSize14 = 375;

inline constexpr std::size_t kVersionMajor = 24;
inline constexpr std::size_t kVersionMinor = 25;
inline constexpr std::size_t kHeaderSizeField = 94;
inline constexpr std::size_t kPointDataOffset = 96;
inline constexpr std::size_t kVlrCount = 100;
inline constexpr std::size_t kPointFormat = 104;
inline constexpr std::size_t kRecordLength = 105;
inline constexpr std::size_t kLegacyPointCount = 107;
inline constexpr std::size_t kPointsByReturn = 111;
inline constexpr std::size_t kScale = 131;
inline constexpr std::size_t kOffset = 155;
inline constexpr std::size_t kMaxX = 179; // max x, min x, max y, min y, max z, min z
inline constexpr std::size_t kPointCount14 = 247;

inline constexpr std::size_t header_size_for(std::uint8_t minor) {
    switch (minor) {
    case 2: return kHeaderSize12;
    case 3: return kHeaderSize13;
    default: return kHeaderSize14;
    }
}

inline constexpr std::uint16_t min_record_length(std::uint8_t format) {
    constexpr std::array<std::uint16_t, 4> lengths{20, 28, 26, 34};
    return lengths[format];
}

// Offset of the RGB triple within a record.
inline constexpr std::size_t color_offset(std::uint8_t format) { return format == 2 ? 20 : 28; }

} // namespace layout

inline LasHeader parse_las_header(std::span<const std::byte> bytes) {
    using detail::load_le;

    if (bytes.size() < 4)
        throw Error(ErrorCode::Truncated, "input shorter than the LAS signature");

    LasHeader h;
    std::memcpy(h.signature.data(), bytes.data(), 4);
    if (std::string_view(h.signature.data(), 4) != "LASF")
        throw Error(ErrorCode::BadMagic, "signature is not \"LASF\"");

    if (bytes.size() <= layout::kVersionMinor)
        throw Error(ErrorCode::Truncated, "input ends before the version fields");
    h.version_major = load_le<std::uint8_t>(bytes, layout::kVersionMajor);
    h.version_minor = load_le<std::uint8_t>(bytes, layout::kVersionMinor);
    if (h.version_major != 1 || h.version_minor < 2 || h.version_minor > 4)
        throw Error(ErrorCode::UnsupportedVersion,
                    "LAS " + std::to_string(h.version_major) + "." +
                        std::to_string(h.version_minor) + " (supported: 1.2-1.4)");

    const std::size_t fixed = layout::header_size_for(h.version_minor);
    if (bytes.size() < fixed)
        throw Error(ErrorCode::Truncated, "have " + std::to_string(bytes.size()) +
                                              " header bytes, version needs " + std::to_string(fixed));

    h.header_size = load_le<std::uint16_t>(bytes, layout::kHeaderSizeField);
    if (h.header_size < fixed)
        throw Error(ErrorCode::InvalidHeader, "header size " + std::to_string(h.header_size) +
                                                  " below the version minimum " + std::to_string(fixed));
    if (bytes.size() < h.header_size)
        throw Error(ErrorCode::Truncated, "header declares " + std::to_string(h.header_size) +
                                              " bytes, have " + std::to_string(bytes.size()));

    h.point_data_offset = load_le<std::uint32_t>(bytes, layout::kPointDataOffset);
    h.vlr_count = load_le<std::uint32_t>(bytes, layout::kVlrCount);
    h.point_format_id = load_le<std::uint8_t>(bytes, layout::kPointFormat);
    h.point_record_length = load_le<std::uint16_t>(bytes, layout::kRecordLength);
    h.point_count = load_le<std::uint32_t>(bytes, layout::kLegacyPointCount);
    if (h.version_minor == 4) {
        const auto count64 = load_le<std::uint64_t>(bytes, layout::kPointCount14);
        if (count64 != 0)
            h.point_count = count64;
    }

    h.scale = {load_le<double>(bytes, layout::kScale), load_le<double>(bytes, layout::kScale + 8),
               load_le<double>(bytes, layout::kScale + 16)};
    h.offset = {load_le<double>(bytes, layout::kOffset), load_le<double>(bytes, layout::kOffset + 8),
                load_le<double>(bytes, layout::kOffset + 16)};
    h.bbox_max = {load_le<double>(bytes, layout::kMaxX), load_le<double>(bytes, layout::kMaxX + 16),
                  load_le<double>(bytes, layout::kMaxX + 32)};
    h.bbox_min = {load_le<double>(bytes, layout::kMaxX + 8), load_le<double>(bytes, layout::kMaxX + 24),
                  load_le<double>(bytes, layout::kMaxX + 40)};

    if (h.point_format_id > 3)
        throw Error(ErrorCode::UnsupportedPointFormat,
                    "point format " + std::to_string(h.point_format_id) + " (supported: 0-3)");
    if (h.point_record_length < layout::min_record_length(h.point_format_id))
        throw Error(ErrorCode::InvalidHeader,
                    "record length " + std::to_string(h.point_record_length) + " too short for format " +
                        std::to_string(h.point_format_id));

    auto positive = [](double s) { return std::isfinite(s) && s > 0.0; };
    if (!positive(h.scale.x) || !positive(h.scale.y) || !positive(h.scale.z))
        throw Error(ErrorCode::InvalidHeader, "scale factors must be finite and positive");
    if (!std::isfinite(h.offset.x) || !std::isfinite(h.offset.y) || !std::isfinite(h.offset.z))
        throw Error(ErrorCode::InvalidHeader, "offsets must be finite");
    // Written as !(min <= max) so NaN bounds are rejected too.
    if (!(h.bbox_min.x <= h.bbox_max.x) || !(h.bbox_min.y <= h.bbox_max.y) ||
        !(h.bbox_min.z <= h.bbox_max.z))
        throw Error(ErrorCode::InvalidHeader, "bounding box min exceeds max");
    if (h.point_data_offset < h.header_size)
        throw Error(ErrorCode::InvalidHeader, "point data offset " + std::to_string(h.point_data_offset) +
                                                  " lies inside the header");
    return h;
}

// Decodes one record. `record` must hold at least the format's minimum length;
// trailing extra bytes are ignored.
inline PointRecord decode_point(std::span<const std::byte> record, const LasHeader& h) {
    using detail::load_le;
    PointRecord p;
    p.x = load_le<std::int32_t>(record, 0) * h.scale.x + h.offset.x;
    p.y = load_le<std::int32_t>(record, 4) * h.scale.y + h.offset.y;
    p.z = load_le<std::int32_t>(record, 8) * h.scale.z + h.offset.z;
    p.intensity = load_le<std::uint16_t>(record, 12);
    // Bits 5-7 are the synthetic/key-point/withheld flags.
    p.classification = load_le<std::uint8_t>(record, 15) & 0x1F;
    if (h.has_color()) {
        const auto at = layout::color_offset(h.point_format_id);
        p.color = Rgb{load_le<std::uint16_t>(record, at), load_le<std::uint16_t>(record, at + 2),
                      load_le<std::uint16_t>(record, at + 4)};
    }
    return p;
}

// Sequential reader over the point block of one LAS stream.
class PointReader {
public:
    // `consumed` is how many bytes of the file the stream has already moved
    // past; the reader skips forward to the header's point data offset.
    PointReader(std::istream& source, LasHeader header, std::uint64_t consumed = 0)
        : source_(&source), header_(header), remaining_(header.point_count),
          buffer_(header.point_record_length) {
        if (consumed > header_.point_data_offset)
            throw Error(ErrorCode::InvalidHeader, "stream already past the point data offset");
        skip(header_.point_data_offset - consumed);
    }

    const LasHeader& header() const noexcept { return header_; }
    std::uint64_t remaining() const noexcept { return remaining_; }

    std::optional<PointRecord> next() {
        if (remaining_ == 0)
            return std::nullopt;
        source_->read(reinterpret_cast<char*>(buffer_.data()),
                      static_cast<std::streamsize>(buffer_.size()));
        if (source_->bad())
            throw Error(ErrorCode::Io, "read failed");
        if (static_cast<std::size_t>(source_->gcount()) != buffer_.size())
            throw Error(ErrorCode::Truncated,
                        "stream ended with " + std::to_string(remaining_) + " of " +
                            std::to_string(header_.point_count) + " records unread");
        --remaining_;
        return decode_point(buffer_, header_);
    }

private:
    void skip(std::uint64_t count) {
        while (count > 0) {
            const auto step = static_cast<std::streamsize>(
                std::min<std::uint64_t>(count, std::numeric_limits<std::int32_t>::max()));
            source_->ignore(step);
            if (source_->gcount() != step)
                throw Error(ErrorCode::Truncated, "stream ends before the point data offset");
            count -= static_cast<std::uint64_t>(step);
        }
    }

    std::istream* source_;
    LasHeader header_;
    std::uint64_t remaining_;
    std::vector<std::byte> buffer_;
};

// Reads and validates the header from the current stream position, which
// must be byte 0 of the file. Returns the header and the bytes consumed.
inline std::pair<LasHeader, std::uint64_t> read_header(std::istream& source) {
    std::vector<std::byte> bytes(layout::kHeaderSize12);
    source.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (source.bad())
        throw Error(ErrorCode::Io, "read failed");
    bytes.resize(static_cast<std::size_t>(source.gcount()));

    if (bytes.size() > layout::kHeaderSizeField + 1) {
        const auto declared = detail::load_le<std::uint16_t>(bytes, layout::kHeaderSizeField);
        if (declared > bytes.size() && bytes.size() == layout::kHeaderSize12) {
            const auto have = bytes.size();
            bytes.resize(declared);
            source.read(reinterpret_cast<char*>(bytes.data() + have),
                        static_cast<std::streamsize>(declared - have));
            if (source.bad())
                throw Error(ErrorCode::Io, "read failed");
            bytes.resize(have + static_cast<std::size_t>(source.gcount()));
        }
    }
    auto header = parse_las_header(bytes);
    return {header, bytes.size()};
}

// Point stream for a source positioned at byte 0, using an already parsed
// header from the same file.
inline PointReader read_points(std::istream& source, const LasHeader& header) {
    return PointReader(source, header, 0);
}

struct LasFile {
    LasHeader header;
    std::vector<PointRecord> points;
};

inline LasFile read_las(std::istream& source) {
    auto [header, consumed] = read_header(source);
    PointReader reader(source, header, consumed);
    LasFile file{header, {}};
    // Cap the up-front reservation; the count comes from untrusted input.
    file.points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(header.point_count, 1u << 20)));
    while (auto p = reader.next())
        file.points.push_back(*p);
    return file;
}

inline LasFile read_las(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read_las(in);
}

// Serializes records as LAS 1.2, format 2 when any record has color, else
// format 0. Throws QuantizationOverflow when a coordinate does not fit the
// 32-bit raw range at the given scale and offset.
inline std::vector<std::byte> encode_las(std::span<const PointRecord> records, Vec3 scale, Vec3 offset) {
    using detail::store_le;

    auto positive = [](double s) { return std::isfinite(s) && s > 0.0; };
    if (!positive(scale.x) || !positive(scale.y) || !positive(scale.z))
        throw Error(ErrorCode::InvalidHeader, "scale factors must be finite and positive");

    const bool colored = std::any_of(records.begin(), records.end(),
                                     [](const PointRecord& p) { return p.color.has_value(); });
    const std::uint8_t format = colored ? 2 : 0;
    const std::uint16_t record_length = layout::min_record_length(format);
    const std::size_t header_size = layout::kHeaderSize12;

    if (records.size() > std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidRecord, "too many records for a LAS 1.2 file");

    std::vector<std::byte> out(header_size + records.size() * record_length, std::byte{0});
    std::span<std::byte> bytes(out);

    auto quantize = [](double v, double s, double o) -> std::int32_t {
        const double raw = std::nearbyint((v - o) / s);
        if (!std::isfinite(raw) || raw < std::numeric_limits<std::int32_t>::min() ||
            raw > std::numeric_limits<std::int32_t>::max())
            throw Error(ErrorCode::QuantizationOverflow,
                        "coordinate " + std::to_string(v) + " outside the 32-bit raw range");
        return static_cast<std::int32_t>(raw);
    };

    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};
    std::array<std::uint32_t, 5> by_return{};

    std::size_t at = header_size;
    for (const auto& p : records) {
        if (p.classification > 31)
            throw Error(ErrorCode::InvalidRecord,
                        "classification " + std::to_string(p.classification) + " does not fit formats 0-3");
        const auto rx = quantize(p.x, scale.x, offset.x);
        const auto ry = quantize(p.y, scale.y, offset.y);
        const auto rz = quantize(p.z, scale.z, offset.z);
        store_le<std::int32_t>(bytes, at, rx);
        store_le<std::int32_t>(bytes, at + 4, ry);
        store_le<std::int32_t>(bytes, at + 8, rz);
        store_le<std::uint16_t>(bytes, at + 12, p.intensity);
        // Return number 1 of 1.
        store_le<std::uint8_t>(bytes, at + 14, std::uint8_t{0x09});
        store_le<std::uint8_t>(bytes, at + 15, p.classification);
        if (format == 2) {
            const Rgb c = p.color.value_or(Rgb{});
            store_le<std::uint16_t>(bytes, at + 20, c.r);
            store_le<std::uint16_t>(bytes, at + 22, c.g);
            store_le<std::uint16_t>(bytes, at + 24, c.b);
        }
        ++by_return[0];

        const Vec3 q{rx * scale.x + offset.x, ry * scale.y + offset.y, rz * scale.z + offset.z};
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y), std::min(lo.z, q.z)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y), std::max(hi.z, q.z)};
        at += record_length;
    }
    if (records.empty())
        lo = hi = Vec3{};

    std::memcpy(out.data(), "LASF", 4);
    store_le<std::uint8_t>(bytes, layout::kVersionMajor, 1);
    store_le<std::uint8_t>(bytes, layout::kVersionMinor, 2);
    const char software[] = "heights";
    std::memcpy(out.data() + 58, software, sizeof(software) - 1);
    store_le<std::uint16_t>(bytes, layout::kHeaderSizeField, static_cast<std::uint16_t>(header_size));
    store_le<std::uint32_t>(bytes, layout::kPointDataOffset, static_cast<std::uint32_t>(header_size));
    store_le<std::uint32_t>(bytes, layout::kVlrCount, 0);
    store_le<std::uint8_t>(bytes, layout::kPointFormat, format);
    store_le<std::uint16_t>(bytes, layout::kRecordLength, record_length);
    store_le<std::uint32_t>(bytes, layout::kLegacyPointCount, static_cast<std::uint32_t>(records.size()));
    for (std::size_t i = 0; i < by_return.size(); ++i)
        store_le<std::uint32_t>(bytes, layout::kPointsByReturn + 4 * i, by_return[i]);
    store_le<double>(bytes, layout::kScale, scale.x);
    store_le<double>(bytes, layout::kScale + 8, scale.y);
    store_le<double>(bytes, layout::kScale + 16, scale.z);
    store_le<double>(bytes, layout::kOffset, offset.x);
    store_le<double>(bytes, layout::kOffset + 8, offset.y);
    store_le<double>(bytes, layout::kOffset + 16, offset.z);
    store_le<double>(bytes, layout::kMaxX, hi.x);
    store_le<double>(bytes, layout::kMaxX + 8, lo.x);
    store_le<double>(bytes, layout::kMaxX + 16, hi.y);
    store_le<double>(bytes, layout::kMaxX + 24, lo.y);
    store_le<double>(bytes, layout::kMaxX + 32, hi.z);
    store_le<double>(bytes, layout::kMaxX + 40, lo.z);
    return out;
}

inline void write_las(std::span<const PointRecord> records, Vec3 scale, Vec3 offset,
                      const std::filesystem::path& path) {
    const auto bytes = encode_las(records, scale, offset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::Io, "write failed: " + path.string());
}

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

} // namespace detail

// Plain text points: "x y z classification" per line, '#' starts a comment
// line, blank lines are ignored.
inline std::vector<PointRecord> read_xyz_text(std::istream& source) {
    std::vector<PointRecord> points;
    std::string line;
    std::size_t number = 0;
    while (std::getline(source, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;

        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;)
            tokens.push_back(t);
        if (tokens.size() != 4)
            throw LineError(number, "expected 4 fields, found " + std::to_string(tokens.size()));

        PointRecord p;
        if (!detail::parse_double(tokens[0], p.x) || !detail::parse_double(tokens[1], p.y) ||
            !detail::parse_double(tokens[2], p.z))
            throw LineError(number, "non-numeric coordinate");
        int code = -1;
        const auto& c = tokens[3];
        auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), code);
        if (ec != std::errc{} || ptr != c.data() + c.size() || code < 0 || code > 255)
            throw LineError(number, "classification must be an integer in 0-255");
        p.classification = static_cast<std::uint8_t>(code);
        points.push_back(p);
    }
    if (source.bad())
        throw Error(ErrorCode::Io, "read failed");
    return points;
}

inline std::vector<PointRecord> read_xyz_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read_xyz_text(in);
}

// Dispatches on extension: .xyz/.txt are text, anything else LAS.
inline std::vector<PointRecord> read_point_file(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".xyz" || ext == ".txt")
        return read_xyz_text(path);
    return read_las(path).points;
}

} // namespace heights::las
