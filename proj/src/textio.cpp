#include "calfsense/textio.hpp"

#include <charconv>
#include <sstream>

#include "calfsense/error.hpp"

namespace calfsense::textio {

std::string fmt17(double value) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
}

void write_values(std::ostream& out, std::string_view key, std::span<const double> values) {
    out << key;
    for (double v : values) out << ' ' << fmt17(v);
    out << '\n';
}

std::vector<std::string> LineReader::next(std::string_view key) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::vector<std::string> words;
        for (std::string w; ss >> w;) words.push_back(std::move(w));
        if (words.empty()) continue;
        if (!key.empty() && words.front() != key) {
            throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_) + ": expected '" +
                                                std::string(key) + "', found '" + words.front() + "'");
        }
        words.erase(words.begin());
        return words;
    }
    throw Error(Errc::BadModelFile, "unexpected end of file looking for '" + std::string(key) + "'");
}

void LineReader::expect_header(std::string_view magic, int version) {
    const auto words = next(magic);
    if (words.size() != 1 || words[0] != std::to_string(version)) {
        throw Error(Errc::BadModelFile, "unsupported " + std::string(magic) + " version");
    }
}

double LineReader::read_scalar(std::string_view key) {
    const auto v = read_values(key, 1);
    return v[0];
}

std::size_t LineReader::read_count(std::string_view key) {
    const auto words = next(key);
    std::size_t value = 0;
    if (words.size() != 1) throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_));
    const auto [ptr, ec] = std::from_chars(words[0].data(), words[0].data() + words[0].size(), value);
    if (ec != std::errc() || ptr != words[0].data() + words[0].size()) {
        throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_) + ": bad count");
    }
    return value;
}

std::string LineReader::read_word(std::string_view key) {
    const auto words = next(key);
    if (words.size() != 1) {
        throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_) + ": expected one value");
    }
    return words[0];
}

std::vector<std::string> LineReader::read_words(std::string_view key) { return next(key); }

std::vector<double> LineReader::read_values(std::string_view key, std::size_t expected) {
    return parse_values(next(key), key, expected);
}

std::vector<double> LineReader::read_vector(std::string_view key) {
    const auto words = next(key);
    return parse_values(words, key, words.size());
}

std::vector<double> LineReader::parse_values(const std::vector<std::string>& words,
                                             std::string_view key, std::size_t expected) {
    if (words.size() != expected) {
        throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_) + ": expected " +
                                            std::to_string(expected) + " values for '" +
                                            std::string(key) + "'");
    }
    std::vector<double> values(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), values[i]);
        if (ec != std::errc() || ptr != w.data() + w.size()) {
            throw Error(Errc::BadModelFile, "line " + std::to_string(line_no_) + ": bad number '" + w + "'");
        }
    }
    return values;
}

}  // namespace calfsense::textio
