#include "calfsense/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "calfsense/error.hpp"

namespace calfsense {

namespace {

std::string header_line() {
    std::string h = "t_s";
    char buf[8];
    for (std::size_t c = 0; c < kChannels; ++c) {
        std::snprintf(buf, sizeof buf, ",ch%02zu", c + 1);
        h += buf;
    }
    h += ",label";
    return h;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t column) {
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw Error(Errc::NonNumericCell, "line " + std::to_string(line_no) + " column " +
                                              std::to_string(column + 1) + ": '" +
                                              std::string(cell) + "'");
    }
    return value;
}

}  // namespace

void write_csv(const Session& session, std::ostream& out) {
    out << header_line() << '\n';
    const std::string label(to_string(session.motion));
    char buf[64];
    for (const auto& f : session.frames) {
        const std::int64_t us = f.timestamp_us;
        const char* sign = us < 0 ? "-" : "";
        const std::int64_t mag = us < 0 ? -us : us;
        std::snprintf(buf, sizeof buf, "%s%lld.%06lld", sign, static_cast<long long>(mag / 1000000),
                      static_cast<long long>(mag % 1000000));
        out << buf;
        for (double v : f.volts) {
            std::snprintf(buf, sizeof buf, ",%.12f", v);
            out << buf;
        }
        out << ',' << label << '\n';
    }
}

void write_csv(const Session& session, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
    write_csv(session, out);
    if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

Session read_csv(std::istream& in) {
    Session session;
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::MalformedHeader, "line 1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header_line()) {
        throw Error(Errc::MalformedHeader, "line 1: expected '" + header_line() + "'");
    }

    bool have_label = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != kChannels + 2) {
            throw Error(Errc::RowArity, "line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(kChannels + 2) + " cells, found " +
                                            std::to_string(cells.size()));
        }
        SensorFrame frame;
        frame.seq = static_cast<std::uint32_t>(session.frames.size());
        frame.timestamp_us = std::llround(parse_cell(cells[0], line_no, 0) * 1e6);
        for (std::size_t c = 0; c < kChannels; ++c) {
            frame.volts[c] = parse_cell(cells[c + 1], line_no, c + 1);
        }
        const auto label = cells[kChannels + 1];
        if (!label.empty() && !have_label) {
            const auto parsed = try_parse_motion(label);
            if (!parsed) {
                throw Error(Errc::UnknownMotion, "line " + std::to_string(line_no) +
                                                     ": unknown label '" + std::string(label) + "'");
            }
            session.motion = *parsed;
            have_label = true;
        }
        session.frames.push_back(frame);
    }

    if (session.frames.size() >= 2) {
        const double span = session.duration_s();
        if (span > 0.0) {
            session.sample_rate_hz = static_cast<double>(session.frames.size() - 1) / span;
        }
    }
    return session;
}

Session read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
    return read_csv(in);
}

}  // namespace calfsense
