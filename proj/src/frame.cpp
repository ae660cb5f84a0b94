#include "canhmm/frame.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "canhmm/errors.hpp"

namespace canhmm {

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

[[noreturn]] void fail(std::string_view line, std::size_t column, const std::string& what) {
    throw ParseError(std::string(line), column, what);
}

double parse_timestamp(std::string_view line, std::string_view text, std::size_t column) {
    double ts = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, ts);
    if (ec != std::errc() || ptr != last) fail(line, column, "bad timestamp");
    if (!std::isfinite(ts) || ts < 0.0) fail(line, column, "timestamp must be finite and non-negative");
    return ts;
}

// Identifier text: width > 3 hex digits marks an extended (29-bit) id.
void parse_id(std::string_view line, std::string_view text, std::size_t column, CanFrame& frame) {
    if (text.empty()) fail(line, column, "empty identifier");
    std::uint32_t id = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int nib = hex_nibble(text[i]);
        if (nib < 0) fail(line, column + i, "bad hex digit in identifier");
        if (text.size() > 8) fail(line, column, "identifier wider than 29 bits");
        id = (id << 4) | static_cast<std::uint32_t>(nib);
    }
    frame.extended = text.size() > 3;
    if (frame.extended && id > kMaxExtendedId) fail(line, column, "identifier exceeds 29 bits");
    if (!frame.extended && id > kMaxStandardId) fail(line, column, "identifier exceeds 11 bits");
    frame.id = id;
}

void parse_payload(std::string_view line, std::string_view text, std::size_t column, CanFrame& frame) {
    if (text.size() % 2 != 0) fail(line, column, "odd number of payload hex digits");
    if (text.size() / 2 > kMaxPayloadBytes) {
        throw PayloadLengthError(std::string(line), column, "payload exceeds 8 bytes");
    }
    frame.data.clear();
    frame.data.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        const int hi = hex_nibble(text[i]);
        const int lo = hex_nibble(text[i + 1]);
        if (hi < 0 || lo < 0) fail(line, column + i, "bad hex digit in payload");
        frame.data.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
}

// "(<ts>) <iface> <ID>#<HEXDATA>"
CanFrame parse_format_a(std::string_view line) {
    CanFrame frame;
    if (line.empty() || line.front() != '(') fail(line, 0, "expected '('");
    const auto close = line.find(')');
    if (close == std::string_view::npos) fail(line, line.size(), "missing ')'");
    frame.timestamp = parse_timestamp(line, line.substr(1, close - 1), 1);

    std::size_t pos = close + 1;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const auto iface_end = line.find(' ', pos);
    if (pos >= line.size() || iface_end == std::string_view::npos) {
        fail(line, pos, "missing interface field");
    }
    pos = iface_end + 1;
    while (pos < line.size() && line[pos] == ' ') ++pos;

    const auto hash = line.find('#', pos);
    if (hash == std::string_view::npos) fail(line, pos, "missing '#' separator");
    parse_id(line, line.substr(pos, hash - pos), pos, frame);

    auto payload = line.substr(hash + 1);
    while (!payload.empty() && (payload.back() == '\r' || payload.back() == ' ')) {
        payload.remove_suffix(1);
    }
    parse_payload(line, payload, hash + 1, frame);
    return frame;
}

// "<ts>,<id_hex>,<data_hex>"
CanFrame parse_format_b(std::string_view line) {
    CanFrame frame;
    const auto c1 = line.find(',');
    if (c1 == std::string_view::npos) fail(line, line.size(), "missing ',' after timestamp");
    const auto c2 = line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) fail(line, line.size(), "missing ',' after identifier");
    frame.timestamp = parse_timestamp(line, line.substr(0, c1), 0);
    parse_id(line, line.substr(c1 + 1, c2 - c1 - 1), c1 + 1, frame);
    auto payload = line.substr(c2 + 1);
    while (!payload.empty() && (payload.back() == '\r' || payload.back() == ' ')) {
        payload.remove_suffix(1);
    }
    parse_payload(line, payload, c2 + 1, frame);
    return frame;
}

}  // namespace

std::vector<std::string> frame_violations(const CanFrame& frame) {
    std::vector<std::string> out;
    if (frame.data.size() > kMaxPayloadBytes) out.push_back("payload exceeds 8 bytes");
    const std::uint32_t max_id = frame.extended ? kMaxExtendedId : kMaxStandardId;
    if (frame.id > max_id) out.push_back("identifier does not fit its declared width");
    if (!std::isfinite(frame.timestamp) || frame.timestamp < 0.0) {
        out.push_back("timestamp must be finite and non-negative");
    }
    return out;
}

CanFrame parse_log_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    if (line.empty()) fail(line, 0, "empty line");
    if (line.front() == '(') return parse_format_a(line);
    if (line.find(',') != std::string_view::npos) return parse_format_b(line);
    fail(line, 0, "unrecognized log line format");
}

std::string format_log_line(const CanFrame& frame) {
    char head[64];
    const int n = frame.extended
                      ? std::snprintf(head, sizeof head, "(%.6f) can0 %08X#", frame.timestamp, frame.id)
                      : std::snprintf(head, sizeof head, "(%.6f) can0 %03X#", frame.timestamp, frame.id);
    std::string out(head, static_cast<std::size_t>(n));
    static const char* digits = "0123456789ABCDEF";
    for (const auto byte : frame.data) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xF]);
    }
    return out;
}

std::vector<CanFrame> read_can_log(std::istream& in) {
    std::vector<CanFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        while (!view.empty() && (view.back() == '\r' || view.back() == ' ')) view.remove_suffix(1);
        if (view.empty()) continue;
        try {
            frames.push_back(parse_log_line(view));
        } catch (const ParseError& e) {
            throw Error("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return frames;
}

std::vector<CanFrame> read_can_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open log file: " + path);
    return read_can_log(in);
}

}  // namespace canhmm
