// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tempo {

/// Shortest decimal string that round-trips the double exactly.
std::string num_str(double v);

/// Fixed-point formatting, e.g. fixed_str(0.0159961, 4) == "0.0160".
std::string fixed_str(double v, int precision);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::vector<std::string> split(std::string_view line, char sep);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace tempo
