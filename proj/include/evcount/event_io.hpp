#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "evcount/events.hpp"

namespace evcount {

enum class StreamFormat { csv, binary };

/// Picks a format from a file extension: ".csv" -> csv, ".evb"/".bin" -> binary.
std::optional<StreamFormat> format_from_extension(const std::filesystem::path& path);

/// Incremental reader; validates bounds and timestamp order as it goes.
///
/// CSV sources take their geometry from the `geometry` argument; binary
/// sources carry it in the file header (see docs/formats.md) and the
/// argument is ignored.
class EventReader {
public:
    EventReader(std::istream& in, StreamFormat format, const SensorGeometry& geometry = {});

    /// Appends up to `max_events` events to `out`. Returns false once the
    /// source is exhausted and nothing was appended.
    bool read_batch(std::vector<Event>& out, std::size_t max_events = 65536);

    const SensorGeometry& geometry() const { return geometry_; }

private:
    bool read_csv_record(Event& ev);
    bool read_binary_record(Event& ev);
    void check_event(Event& ev);

    std::istream& in_;
    StreamFormat format_;
    SensorGeometry geometry_;
    std::uint64_t record_index_ = 0; // 1-based record number
    std::uint64_t line_number_ = 0;  // 1-based source line (CSV)
    std::int64_t prev_t_ = -1;
    std::vector<char> buffer_;
    std::size_t buf_pos_ = 0;
    std::size_t buf_len_ = 0;
};

/// Incremental writer; binary sinks get their header written up front.
class EventWriter {
public:
    EventWriter(std::ostream& out, StreamFormat format, const SensorGeometry& geometry);
    void write(const Event& ev);
    void write(std::span<const Event> events);
    void flush();

private:
    std::ostream& out_;
    StreamFormat format_;
    std::vector<char> buffer_;
};

EventStream read_events(std::istream& in, StreamFormat format, const SensorGeometry& geometry = {});
void write_events(std::ostream& out, const EventStream& stream, StreamFormat format);

EventStream read_events_file(const std::filesystem::path& path, std::optional<StreamFormat> format = {},
                             const SensorGeometry& geometry = {});
void write_events_file(const std::filesystem::path& path, const EventStream& stream,
                       std::optional<StreamFormat> format = {});

} // namespace evcount
