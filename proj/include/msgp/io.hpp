#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgp/dataset.hpp"

namespace msgp {

inline constexpr int kFormatVersion = 1;

// Headered CSV: x1..xd, y, optional true_component. Empty or "nan" y cells
// are missing, allowed only when `allow_missing`. Malformed rows are data
// errors citing the 1-based file line.
Dataset parse_dataset_csv(const std::string& text, bool allow_missing, const std::string& source = "input");
Dataset read_dataset_csv(const std::string& path, bool allow_missing = false);
std::string format_dataset_csv(const Dataset& data);

// Round-trip exact decimal formatting.
std::string format_double(double v);

std::string read_file(const std::string& path);
// Writes to a sibling temporary, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

std::string sha1_hex(const std::string& bytes);

}  // namespace msgp
