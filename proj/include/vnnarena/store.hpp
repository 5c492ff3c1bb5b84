#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vnnarena/runner.hpp"

namespace vnna::store {

// One verdict per line, append-only, space-separated key=value tokens in a
// fixed field order (values percent-encoded). witness_valid is recorded when
// the runner validated a sat witness at record time.
struct Entry {
    runner::VerdictRecord record;
    std::optional<bool> witness_valid;
    double started = 0;   // unix seconds
    double finished = 0;
};

std::string format_entry(const Entry& e);
Entry parse_entry(std::string_view line, int line_number);

std::vector<Entry> load(const std::filesystem::path& path);

// Appends one line and flushes. Throws IoError on failure.
void append(const std::filesystem::path& path, const Entry& e);

}  // namespace vnna::store
