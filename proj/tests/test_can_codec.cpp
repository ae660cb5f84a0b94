#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "canhmm/frame.hpp"
#include "canhmm/obd.hpp"
#include "canhmm/rand.hpp"
#include "canhmm/series.hpp"

using namespace canhmm;

TEST_CASE("parse format A line") {
    const auto frame = parse_log_line("(1436509052.249713) can0 0D1#11D6");
    CHECK(frame.timestamp == doctest::Approx(1436509052.249713).epsilon(1e-12));
    CHECK(frame.id == 0x0D1);
    CHECK(!frame.extended);
    CHECK(frame.data == std::vector<std::uint8_t>{0x11, 0xD6});
}

TEST_CASE("parse format A with empty payload") {
    const auto frame = parse_log_line("(0.0) can0 7DF#");
    CHECK(frame.timestamp == 0.0);
    CHECK(frame.id == 0x7DF);
    CHECK(frame.data.empty());
}

TEST_CASE("wide identifier text marks the frame extended") {
    const auto frame = parse_log_line("(1.5) can0 18DB33F1#4155");
    CHECK(frame.id == 0x18DB33F1);
    CHECK(frame.extended);  // 0x18DB33F1 > 0x7FF cannot be an 11-bit id
    CHECK(frame.data == std::vector<std::uint8_t>{0x41, 0x55});

    // Four hex digits force extended even for a small value.
    const auto padded = parse_log_line("(1.5) can0 00D1#");
    CHECK(padded.extended);
    CHECK(padded.id == 0x0D1);
}

TEST_CASE("parse format B CSV line") {
    const auto frame = parse_log_line("12.500000,7df,0209");
    CHECK(frame.timestamp == doctest::Approx(12.5));
    CHECK(frame.id == 0x7DF);
    CHECK(!frame.extended);
    CHECK(frame.data == std::vector<std::uint8_t>{0x02, 0x09});

    const auto empty = parse_log_line("0.1,0d1,");
    CHECK(empty.data.empty());
}

TEST_CASE("parse errors carry position and kind") {
    CHECK_THROWS_AS(parse_log_line("(abc) can0 0D1#11"), ParseError);
    CHECK_THROWS_AS(parse_log_line("(1.0) can0 0D1#1"), ParseError);        // odd hex
    CHECK_THROWS_AS(parse_log_line("(1.0) can0 XYZ#11"), ParseError);       // bad id
    CHECK_THROWS_AS(parse_log_line("(1.0) can0 FF1#11"), ParseError);       // 0xFF1 > 0x7FF in 3 digits
    CHECK_THROWS_AS(parse_log_line("(-1.0) can0 0D1#11"), ParseError);      // negative ts
    CHECK_THROWS_AS(parse_log_line("garbage"), ParseError);
    CHECK_THROWS_AS(parse_log_line("(1.0) can0 0D1#112233445566778899"), PayloadLengthError);

    try {
        parse_log_line("(1.0) can0 0D1#11ZZ");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == "(1.0) can0 0D1#11ZZ");
        CHECK(e.column() == 17);
    }
}

TEST_CASE("format/parse round trip is exact") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        CanFrame frame;
        // Timestamps on a microsecond lattice survive the 6-decimal format.
        frame.timestamp = static_cast<double>(uniform_int(rng, 0, 2'000'000'000)) * 1e-6 +
                          static_cast<double>(uniform_int(rng, 0, 1'400'000'000));
        frame.timestamp = std::round(frame.timestamp * 1e6) / 1e6;
        frame.extended = uniform01(rng) < 0.5;
        frame.id = static_cast<std::uint32_t>(
            uniform_int(rng, 0, frame.extended ? kMaxExtendedId : kMaxStandardId));
        const auto len = uniform_int(rng, 0, 8);
        for (std::int64_t i = 0; i < len; ++i) {
            frame.data.push_back(static_cast<std::uint8_t>(uniform_int(rng, 0, 255)));
        }
        const auto line = format_log_line(frame);
        const auto parsed = parse_log_line(line);
        CHECK(parsed == frame);
    }
}

TEST_CASE("read_can_log reports the failing line") {
    std::istringstream in("(1.0) can0 0D1#11\n\n(2.0) can0 0D1#XX\n");
    try {
        read_can_log(in);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("decode speed response") {
    CanFrame frame;
    frame.id = 0x7E8;
    frame.data = {0x41, 0x0D, 0x32};
    const auto sample = decode_obd_pid(frame);
    REQUIRE(sample.has_value());
    CHECK(sample->channel == Channel::speed);
    CHECK(sample->value == doctest::Approx(50.0));
}

TEST_CASE("decode rpm response") {
    CanFrame frame;
    frame.data = {0x41, 0x0C, 0x1A, 0xF8};
    const auto sample = decode_obd_pid(frame);
    REQUIRE(sample.has_value());
    CHECK(sample->channel == Channel::rpm);
    CHECK(sample->value == doctest::Approx(1726.0));  // (26*256+248)/4
}

TEST_CASE("decode coolant offset cancellation") {
    CanFrame frame;
    frame.data = {0x41, 0x05, 0x28};
    const auto sample = decode_obd_pid(frame);
    REQUIRE(sample.has_value());
    CHECK(sample->channel == Channel::coolant_temp);
    CHECK(sample->value == doctest::Approx(0.0));
}

TEST_CASE("decode remaining channel formulas") {
    CanFrame frame;
    frame.data = {0x41, 0x0F, 0x50};
    CHECK(decode_obd_pid(frame)->value == doctest::Approx(40.0));  // intake 0x50-40
    frame.data = {0x41, 0x11, 0xFF};
    CHECK(decode_obd_pid(frame)->value == doctest::Approx(100.0));  // throttle full
    frame.data = {0x41, 0x04, 0x80};
    CHECK(decode_obd_pid(frame)->value == doctest::Approx(128.0 * 100.0 / 255.0));
    frame.data = {0x41, 0x14, 0x64};
    CHECK(decode_obd_pid(frame)->value == doctest::Approx(0.5));  // o2 100/200
}

TEST_CASE("decode skips non-responses and unknown pids") {
    CanFrame frame;
    frame.data = {0x01, 0x0D};  // request, not response
    CHECK(!decode_obd_pid(frame).has_value());
    frame.data = {0x41, 0x42, 0x10};  // unsupported pid
    CHECK(!decode_obd_pid(frame).has_value());
    frame.data = {};
    CHECK(!decode_obd_pid(frame).has_value());
}

TEST_CASE("decode errors on truncated recognized responses") {
    CanFrame frame;
    frame.data = {0x41, 0x0C, 0x1A};  // rpm needs two data bytes
    CHECK_THROWS_AS(decode_obd_pid(frame), DecodeError);
    frame.data = {0x41, 0x0D};
    CHECK_THROWS_AS(decode_obd_pid(frame), DecodeError);
}

TEST_CASE("length-prefixed layout") {
    CanFrame frame;
    frame.data = {0x03, 0x41, 0x0D, 0x32, 0xAA, 0xAA, 0xAA, 0xAA};
    CHECK(!decode_obd_pid(frame, PayloadLayout::bare).has_value());
    const auto sample = decode_obd_pid(frame, PayloadLayout::length_prefixed);
    REQUIRE(sample.has_value());
    CHECK(sample->value == doctest::Approx(50.0));

    // Length byte below a plausible response is skipped.
    frame.data = {0x02, 0x41, 0x0D};
    CHECK(!decode_obd_pid(frame, PayloadLayout::length_prefixed).has_value());
}

TEST_CASE("rpm decode covers the full 16-bit input space") {
    CanFrame frame;
    for (int a = 0; a < 256; ++a) {
        for (int b = 0; b < 256; ++b) {
            frame.data = {0x41, 0x0C, static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
            const auto sample = decode_obd_pid(frame);
            REQUIRE(sample.has_value());
            CHECK(sample->value >= 0.0);
            CHECK(sample->value <= 16383.75);
        }
    }
}

TEST_CASE("raw identifier mapping rules") {
    const RawChannelRule rule{0x201, false, Channel::speed, 2, 2, 0.01, 0.0};
    CanFrame frame;
    frame.id = 0x201;
    frame.data = {0x00, 0x00, 0x12, 0x34};
    const auto sample = decode_raw_channel(frame, {&rule, 1});
    REQUIRE(sample.has_value());
    CHECK(sample->value == doctest::Approx(0x1234 * 0.01));

    frame.id = 0x202;
    CHECK(!decode_raw_channel(frame, {&rule, 1}).has_value());

    frame.id = 0x201;
    frame.data = {0x00};
    CHECK_THROWS_AS(decode_raw_channel(frame, {&rule, 1}), DecodeError);
}

TEST_CASE("extract_channel_series filters, sorts, and keeps equal-ts order") {
    auto speed_frame = [](double ts, std::uint8_t a) {
        CanFrame f;
        f.timestamp = ts;
        f.data = {0x41, 0x0D, a};
        return f;
    };
    auto rpm_frame = [](double ts) {
        CanFrame f;
        f.timestamp = ts;
        f.data = {0x41, 0x0C, 0x10, 0x00};
        return f;
    };

    SUBCASE("empty input gives empty output") {
        CHECK(extract_channel_series({}, Channel::speed).empty());
    }
    SUBCASE("filter semantics") {
        const std::vector<CanFrame> frames = {speed_frame(0, 10), rpm_frame(1), speed_frame(2, 20)};
        const auto series = extract_channel_series(frames, Channel::speed);
        REQUIRE(series.size() == 2);
        CHECK(series[0].value == 10);
        CHECK(series[1].value == 20);
    }
    SUBCASE("out-of-order timestamps come back sorted") {
        const std::vector<CanFrame> frames = {speed_frame(5, 1), speed_frame(2, 2), speed_frame(9, 3)};
        const auto series = extract_channel_series(frames, Channel::speed);
        CHECK(series[0].timestamp == 2);
        CHECK(series[1].timestamp == 5);
        CHECK(series[2].timestamp == 9);
    }
    SUBCASE("equal timestamps keep arrival order") {
        const std::vector<CanFrame> frames = {speed_frame(1, 11), speed_frame(1, 22), speed_frame(1, 33)};
        const auto series = extract_channel_series(frames, Channel::speed);
        CHECK(series[0].value == 11);
        CHECK(series[1].value == 22);
        CHECK(series[2].value == 33);
    }
}

TEST_CASE("series CSV round trip with fixed formatting") {
    const std::vector<PidSample> samples = {
        {Channel::speed, 50.0, 0.0},
        {Channel::speed, 51.5, 1.0},
        {Channel::speed, 49.25, 2.0},
    };
    std::ostringstream out;
    write_series_csv(out, samples);
    CHECK(out.str() == "0.000000,50.000000\n1.000000,51.500000\n2.000000,49.250000\n");

    std::istringstream in(out.str());
    const auto read_back = read_series_csv(in, Channel::speed);
    REQUIRE(read_back.size() == 3);
    CHECK(read_back[1].value == doctest::Approx(51.5));
}

TEST_CASE("series CSV rejects out-of-range values") {
    std::istringstream in("0.0,300.0\n");
    CHECK_THROWS_AS(read_series_csv(in, Channel::speed), Error);
}

TEST_CASE("extraction honors the length-prefixed layout end to end") {
    std::vector<CanFrame> frames;
    for (int t = 0; t < 5; ++t) {
        CanFrame f;
        f.timestamp = t;
        f.id = 0x7E8;
        f.data = {0x03, 0x41, 0x0D, static_cast<std::uint8_t>(40 + t), 0xAA, 0xAA, 0xAA, 0xAA};
        frames.push_back(f);
    }
    CHECK(extract_channel_series(frames, Channel::speed, PayloadLayout::bare).empty());
    const auto series = extract_channel_series(frames, Channel::speed,
                                               PayloadLayout::length_prefixed);
    REQUIRE(series.size() == 5);
    CHECK(series[3].value == doctest::Approx(43.0));
}

TEST_CASE("raw rules take precedence over diagnostic decoding") {
    // Same frame shape as a mode-01 response, but a rule claims the id.
    const RawChannelRule rule{0x7E8, false, Channel::rpm, 3, 1, 100.0, 0.0};
    CanFrame f;
    f.id = 0x7E8;
    f.data = {0x41, 0x0D, 0x32, 0x10};
    const auto series = extract_channel_series({&f, 1}, Channel::rpm, PayloadLayout::bare,
                                               {&rule, 1});
    REQUIRE(series.size() == 1);
    CHECK(series[0].value == doctest::Approx(1600.0));
    // And the speed view of the same traffic is empty: the rule consumed it.
    CHECK(extract_channel_series({&f, 1}, Channel::speed, PayloadLayout::bare, {&rule, 1}).empty());
}
