#include <doctest.h>

#include <set>
#include <sstream>

#include "evcount/frame_builder.hpp"
#include "evcount/rng.hpp"

using namespace evcount;

TEST_CASE("single positive event lights exactly one pixel of frame 0") {
    EventStream stream;
    stream.geometry = {64, 48};
    stream.events = {Event{500, 10, 20, Polarity::positive}};
    const auto frames = accumulate(stream, {});
    REQUIRE(frames.size() == 1);
    const BinaryFrame& f = frames[0];
    CHECK(f.index() == 0);
    CHECK(f.window_start_us() == 0);
    CHECK(f.window_end_us() == 2000);
    CHECK(f.at(10, 20) == 255);
    CHECK(f.active_pixels().size() == 1);
    std::size_t lit = 0;
    for (std::uint8_t v : f.to_dense())
        lit += v == 255;
    CHECK(lit == 1);
}

TEST_CASE("empty stream yields zero frames") {
    EventStream stream;
    stream.geometry = {64, 48};
    CHECK(accumulate(stream, {}).empty());
}

TEST_CASE("frame 0 pixels equal the set of distinct event coordinates") {
    Rng rng(31);
    EventStream stream;
    stream.geometry = {64, 48};
    std::set<std::pair<int, int>> expected;
    std::int64_t t = 0;
    for (int i = 0; i < 100; ++i) {
        t = std::min<std::int64_t>(1999, t + rng.uniform_int(0, 25));
        const auto x = std::uint16_t(rng.uniform_int(0, 63));
        const auto y = std::uint16_t(rng.uniform_int(0, 47));
        stream.events.push_back(Event{t, x, y, Polarity::positive});
        expected.insert({x, y});
    }
    const auto frames = accumulate(stream, {});
    REQUIRE(frames.size() == 1);
    std::set<std::pair<int, int>> got;
    for (const PixelCoord& p : frames[0].active_pixels())
        got.insert({p.x, p.y});
    CHECK(got == expected);
}

TEST_CASE("negative events never light pixels") {
    EventStream stream;
    stream.geometry = {64, 48};
    stream.events = {Event{100, 1, 1, Polarity::negative}, Event{200, 2, 2, Polarity::positive}};
    const auto frames = accumulate(stream, {});
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].at(1, 1) == 0);
    CHECK(frames[0].at(2, 2) == 255);
}

TEST_CASE("every window from 0 through the last event's window is materialized") {
    EventStream stream;
    stream.geometry = {64, 48};
    stream.events = {Event{9000, 3, 4, Polarity::positive}};
    const auto frames = accumulate(stream, {});
    REQUIRE(frames.size() == 5); // windows [0,2000) .. [8000,10000)
    for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
        CHECK(frames[k].index() == k);
        CHECK(frames[k].active_pixels().empty());
    }
    CHECK(frames[4].at(3, 4) == 255);
}

TEST_CASE("an event affects exactly the window floor(t/period)") {
    EventStream stream;
    stream.geometry = {64, 48};
    stream.events = {Event{1999, 1, 1, Polarity::positive}, Event{2000, 2, 2, Polarity::positive}};
    const auto frames = accumulate(stream, {});
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].at(1, 1) == 255);
    CHECK(frames[0].at(2, 2) == 0);
    CHECK(frames[1].at(2, 2) == 255);
    CHECK(frames[1].at(1, 1) == 0);
}

TEST_CASE("duplicating events leaves every frame unchanged") {
    Rng rng(57);
    EventStream stream;
    stream.geometry = {64, 48};
    std::int64_t t = 0;
    for (int i = 0; i < 300; ++i) {
        t += rng.uniform_int(0, 120);
        stream.events.push_back(Event{t, std::uint16_t(rng.uniform_int(0, 63)),
                                      std::uint16_t(rng.uniform_int(0, 47)),
                                      rng.bernoulli(0.8) ? Polarity::positive : Polarity::negative});
    }
    EventStream doubled;
    doubled.geometry = stream.geometry;
    for (const Event& ev : stream.events) {
        doubled.events.push_back(ev);
        doubled.events.push_back(ev);
    }
    const auto a = accumulate(stream, {});
    const auto b = accumulate(doubled, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(a[i].active_pixels() == b[i].active_pixels());
}

TEST_CASE("identical streams give bit-identical frame sequences") {
    Rng rng(58);
    EventStream stream;
    stream.geometry = {64, 48};
    std::int64_t t = 0;
    for (int i = 0; i < 500; ++i) {
        t += rng.uniform_int(0, 60);
        stream.events.push_back(Event{t, std::uint16_t(rng.uniform_int(0, 63)),
                                      std::uint16_t(rng.uniform_int(0, 47)), Polarity::positive});
    }
    const auto a = accumulate(stream, {});
    const auto b = accumulate(stream, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].active_pixels() == b[i].active_pixels());
        REQUIRE(a[i].to_dense() == b[i].to_dense());
    }
}

TEST_CASE("custom accumulation period") {
    EventStream stream;
    stream.geometry = {64, 48};
    stream.events = {Event{999, 1, 1, Polarity::positive}, Event{1000, 2, 2, Polarity::positive}};
    const auto frames = accumulate(stream, AccumulationParams{1000});
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].at(1, 1) == 255);
    CHECK(frames[1].at(2, 2) == 255);
    CHECK_THROWS_AS(accumulate(stream, AccumulationParams{0}), std::invalid_argument);
}

TEST_CASE("streaming advance_to flushes empty windows") {
    FrameAccumulator acc({64, 48}, {});
    std::vector<std::uint64_t> indices;
    const FrameSink sink = [&](const BinaryFrame& f) { indices.push_back(f.index()); };
    acc.advance_to(6000, sink);
    CHECK(indices == std::vector<std::uint64_t>{0, 1, 2});
    acc.push(Event{6100, 1, 1, Polarity::positive}, sink);
    acc.finish(sink);
    REQUIRE(indices.size() == 4);
    CHECK(indices[3] == 3);
}

TEST_CASE("pgm dump has the P5 header and one byte per pixel") {
    EventStream stream;
    stream.geometry = {8, 4};
    stream.events = {Event{0, 1, 2, Polarity::positive}};
    const auto frames = accumulate(stream, {});
    std::ostringstream out;
    write_pgm(frames[0], out);
    const std::string s = out.str();
    CHECK(s.rfind("P5\n8 4\n255\n", 0) == 0);
    CHECK(s.size() == std::string("P5\n8 4\n255\n").size() + 8 * 4);
    CHECK(std::uint8_t(s[std::string("P5\n8 4\n255\n").size() + 2 * 8 + 1]) == 255);
}
