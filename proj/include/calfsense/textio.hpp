#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Helpers for the line-oriented "key value value ..." model files.
namespace calfsense::textio {

// Shortest text that round-trips within 17 significant digits.
std::string fmt17(double value);

void write_values(std::ostream& out, std::string_view key, std::span<const double> values);

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Throws Error(BadModelFile) on any mismatch, naming the line.
    void expect_header(std::string_view magic, int version);
    std::size_t read_count(std::string_view key);
    double read_scalar(std::string_view key);
    std::string read_word(std::string_view key);
    std::vector<double> read_values(std::string_view key, std::size_t expected);
    std::vector<std::string> read_words(std::string_view key);
    // Any number of values.
    std::vector<double> read_vector(std::string_view key);

private:
    std::vector<std::string> next(std::string_view key);
    std::vector<double> parse_values(const std::vector<std::string>& words, std::string_view key,
                                     std::size_t expected);

    std::istream& in_;
    std::size_t line_no_ = 0;
};

}  // namespace calfsense::textio
