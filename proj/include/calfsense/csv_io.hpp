#pragma once

#include <filesystem>
#include <iosfwd>

#include "calfsense/core.hpp"

namespace calfsense {

// Session CSV: header `t_s,ch01,...,ch16,label`, one row per frame, LF endings.
// t_s has 6 decimals, voltages 12. Label is the motion string or empty.
void write_csv(const Session& session, std::ostream& out);
void write_csv(const Session& session, const std::filesystem::path& path);

// Errors: MalformedHeader, RowArity, NonNumericCell (messages carry the line
// number), IoError. The motion comes from the first non-empty label cell;
// sample rate is inferred from the timestamps. Subject and set are left at
// their defaults for the caller to fill in.
Session read_csv(std::istream& in);
Session read_csv(const std::filesystem::path& path);

}  // namespace calfsense
