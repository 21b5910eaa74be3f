#include "evcount/event_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace evcount {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'V', 'C', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordSize = 13; // u64 t + u16 x + u16 y + u8 p

void put_u16(char* p, std::uint16_t v) {
    p[0] = char(v & 0xff);
    p[1] = char((v >> 8) & 0xff);
}

void put_u32(char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        p[i] = char((v >> (8 * i)) & 0xff);
}

void put_u64(char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        p[i] = char((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const char* p) {
    return std::uint16_t(std::uint8_t(p[0])) | std::uint16_t(std::uint8_t(p[1])) << 8;
}

std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | std::uint8_t(p[i]);
    return v;
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | std::uint8_t(p[i]);
    return v;
}

SensorGeometry read_binary_header(std::istream& in) {
    char header[kHeaderSize];
    in.read(header, kHeaderSize);
    if (in.gcount() != std::streamsize(kHeaderSize))
        throw ParseError("binary stream truncated before header");
    if (std::memcmp(header, kMagic.data(), kMagic.size()) != 0)
        throw ParseError("bad magic; not an EVC1 event file");
    const std::uint32_t version = get_u32(header + 4);
    if (version != kVersion)
        throw ParseError("unsupported EVC1 version " + std::to_string(version));
    SensorGeometry geo{get_u16(header + 8), get_u16(header + 10)};
    if (geo.width < 1 || geo.height < 1)
        throw ParseError("binary header declares empty geometry");
    return geo;
}

void write_binary_header(std::ostream& out, const SensorGeometry& geo) {
    char header[kHeaderSize] = {};
    std::memcpy(header, kMagic.data(), kMagic.size());
    put_u32(header + 4, kVersion);
    put_u16(header + 8, geo.width);
    put_u16(header + 10, geo.height);
    out.write(header, kHeaderSize);
}

} // namespace

void validate_stream(const EventStream& stream) {
    std::int64_t prev = -1;
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
        const Event& ev = stream.events[i];
        if (ev.t < 0)
            throw OrderingError("event " + std::to_string(i + 1) + ": negative timestamp");
        if (!stream.geometry.contains(ev.x, ev.y))
            throw BoundsError("event " + std::to_string(i + 1) + ": coordinate (" + std::to_string(ev.x) + "," +
                              std::to_string(ev.y) + ") outside " + std::to_string(stream.geometry.width) + "x" +
                              std::to_string(stream.geometry.height));
        if (ev.t < prev)
            throw OrderingError("event " + std::to_string(i + 1) + ": timestamp " + std::to_string(ev.t) +
                                " regressed below " + std::to_string(prev));
        prev = ev.t;
    }
}

std::optional<StreamFormat> format_from_extension(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv")
        return StreamFormat::csv;
    if (ext == ".evb" || ext == ".bin")
        return StreamFormat::binary;
    return std::nullopt;
}

EventReader::EventReader(std::istream& in, StreamFormat format, const SensorGeometry& geometry)
    : in_(in), format_(format), geometry_(geometry) {
    if (format_ == StreamFormat::binary) {
        geometry_ = read_binary_header(in_);
        buffer_.resize(kRecordSize * 4096);
    }
    if (geometry_.width < 1 || geometry_.height < 1)
        throw BoundsError("geometry must be at least 1x1");
}

void EventReader::check_event(Event& ev) {
    ++record_index_;
    const std::string where = format_ == StreamFormat::csv ? "line " + std::to_string(line_number_)
                                                           : "record " + std::to_string(record_index_);
    if (!geometry_.contains(ev.x, ev.y))
        throw BoundsError(where + ": coordinate (" + std::to_string(ev.x) + "," + std::to_string(ev.y) +
                          ") outside " + std::to_string(geometry_.width) + "x" +
                          std::to_string(geometry_.height));
    if (ev.t < prev_t_)
        throw OrderingError(where + ": timestamp " + std::to_string(ev.t) + " regressed below " +
                            std::to_string(prev_t_));
    prev_t_ = ev.t;
}

bool EventReader::read_csv_record(Event& ev) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;

        const char* p = line.data();
        const char* end = p + line.size();
        const std::uint64_t lineno = line_number_;

        auto field = [&](auto& value, bool last) {
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc{})
                throw ParseError("line " + std::to_string(lineno) + ": malformed field in \"" + line + "\"");
            p = next;
            if (!last) {
                if (p == end || *p != ',')
                    throw ParseError("line " + std::to_string(lineno) + ": expected ',' in \"" + line + "\"");
                ++p;
            }
        };

        std::int64_t t = 0;
        std::uint16_t x = 0, y = 0;
        std::uint8_t pol = 0;
        field(t, false);
        field(x, false);
        field(y, false);
        field(pol, true);
        if (p != end)
            throw ParseError("line " + std::to_string(lineno) + ": trailing characters in \"" + line + "\"");
        if (t < 0)
            throw ParseError("line " + std::to_string(lineno) + ": negative timestamp");
        if (pol > 1)
            throw ParseError("line " + std::to_string(lineno) + ": polarity must be 0 or 1");

        ev = Event{t, x, y, pol ? Polarity::positive : Polarity::negative};
        return true;
    }
    if (in_.bad())
        throw IoError("read failure on CSV source");
    return false;
}

bool EventReader::read_binary_record(Event& ev) {
    if (buf_pos_ == buf_len_) {
        in_.read(buffer_.data(), std::streamsize(buffer_.size()));
        buf_len_ = std::size_t(in_.gcount());
        buf_pos_ = 0;
        if (buf_len_ == 0) {
            if (in_.bad())
                throw IoError("read failure on binary source");
            return false;
        }
        if (buf_len_ % kRecordSize != 0)
            throw ParseError("binary stream truncated mid-record at byte offset " +
                             std::to_string(kHeaderSize + record_index_ * kRecordSize + buf_len_));
    }
    const char* p = buffer_.data() + buf_pos_;
    const std::uint64_t t = get_u64(p);
    if (t > std::uint64_t(std::numeric_limits<std::int64_t>::max()))
        throw ParseError("record " + std::to_string(record_index_ + 1) + ": timestamp out of range");
    const std::uint8_t pol = std::uint8_t(p[12]);
    if (pol > 1)
        throw ParseError("record " + std::to_string(record_index_ + 1) + ": polarity must be 0 or 1");
    ev = Event{std::int64_t(t), get_u16(p + 8), get_u16(p + 10), pol ? Polarity::positive : Polarity::negative};
    buf_pos_ += kRecordSize;
    return true;
}

bool EventReader::read_batch(std::vector<Event>& out, std::size_t max_events) {
    std::size_t appended = 0;
    Event ev;
    while (appended < max_events) {
        const bool got = (format_ == StreamFormat::csv) ? read_csv_record(ev) : read_binary_record(ev);
        if (!got)
            break;
        check_event(ev);
        out.push_back(ev);
        ++appended;
    }
    return appended > 0;
}

EventWriter::EventWriter(std::ostream& out, StreamFormat format, const SensorGeometry& geometry)
    : out_(out), format_(format) {
    if (format_ == StreamFormat::binary)
        write_binary_header(out_, geometry);
    if (!out_)
        throw IoError("write failure on event sink");
}

void EventWriter::write(const Event& ev) {
    if (format_ == StreamFormat::csv) {
        char line[64];
        char* p = line;
        const auto append = [&](auto value) {
            auto r = std::to_chars(p, line + sizeof(line) - 4, value);
            if (r.ec != std::errc{})
                throw IoError("event field does not fit a CSV line");
            p = r.ptr;
        };
        append(ev.t);
        *p++ = ',';
        append(ev.x);
        *p++ = ',';
        append(ev.y);
        *p++ = ',';
        *p++ = (ev.polarity == Polarity::positive) ? '1' : '0';
        *p++ = '\n';
        buffer_.insert(buffer_.end(), line, p);
    } else {
        char rec[kRecordSize];
        put_u64(rec, std::uint64_t(ev.t));
        put_u16(rec + 8, ev.x);
        put_u16(rec + 10, ev.y);
        rec[12] = (ev.polarity == Polarity::positive) ? 1 : 0;
        buffer_.insert(buffer_.end(), rec, rec + kRecordSize);
    }
    if (buffer_.size() >= 1 << 20)
        flush();
}

void EventWriter::write(std::span<const Event> events) {
    for (const Event& ev : events)
        write(ev);
}

void EventWriter::flush() {
    if (!buffer_.empty()) {
        out_.write(buffer_.data(), std::streamsize(buffer_.size()));
        buffer_.clear();
    }
    out_.flush();
    if (!out_)
        throw IoError("write failure on event sink");
}

EventStream read_events(std::istream& in, StreamFormat format, const SensorGeometry& geometry) {
    EventReader reader(in, format, geometry);
    EventStream stream;
    stream.geometry = reader.geometry();
    while (reader.read_batch(stream.events)) {
    }
    return stream;
}

void write_events(std::ostream& out, const EventStream& stream, StreamFormat format) {
    EventWriter writer(out, format, stream.geometry);
    writer.write(stream.events);
    writer.flush();
}

EventStream read_events_file(const std::filesystem::path& path, std::optional<StreamFormat> format,
                             const SensorGeometry& geometry) {
    if (!format)
        format = format_from_extension(path);
    if (!format)
        throw IoError("cannot infer stream format from \"" + path.string() + "\"");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open \"" + path.string() + "\" for reading");
    return read_events(in, *format, geometry);
}

void write_events_file(const std::filesystem::path& path, const EventStream& stream,
                       std::optional<StreamFormat> format) {
    if (!format)
        format = format_from_extension(path);
    if (!format)
        throw IoError("cannot infer stream format from \"" + path.string() + "\"");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open \"" + path.string() + "\" for writing");
    write_events(out, stream, *format);
}

} // namespace evcount
