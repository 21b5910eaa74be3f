#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace evcount {

/// Sign of the brightness change carried by an event.
enum class Polarity : std::uint8_t { negative = 0, positive = 1 };

/// One DVS record: microsecond timestamp, pixel coordinates, polarity.
struct Event {
    std::int64_t t = 0;  ///< microseconds, non-negative
    std::uint16_t x = 0; ///< column
    std::uint16_t y = 0; ///< row
    Polarity polarity = Polarity::positive;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    std::uint16_t width = 1280;
    std::uint16_t height = 720;

    std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }
    bool contains(std::uint16_t x, std::uint16_t y) const { return x < width && y < height; }

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Timestamp-ordered event sequence over a fixed sensor geometry.
/// Timestamps are non-decreasing; equal timestamps keep file order.
struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

class StreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed record (bad field count, non-numeric field, bad header...).
class ParseError : public StreamError {
public:
    using StreamError::StreamError;
};

/// Coordinate outside the sensor geometry.
class BoundsError : public StreamError {
public:
    using StreamError::StreamError;
};

/// Timestamp regression within a stream.
class OrderingError : public StreamError {
public:
    using StreamError::StreamError;
};

/// Underlying source/sink failure.
class IoError : public StreamError {
public:
    using StreamError::StreamError;
};

/// Throws BoundsError/OrderingError on the first invariant violation.
void validate_stream(const EventStream& stream);

} // namespace evcount
