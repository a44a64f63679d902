#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ctdelay::cli {

/// Comma-separated table preceded by `# key: value` metadata lines.
struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void meta(std::string key, std::string value) { metadata.emplace_back(std::move(key), std::move(value)); }
    std::string render() const;
};

/// Writes `text` to a temporary sibling and renames it over `path`.
void write_atomically(const std::string& path, const std::string& text);

} // namespace ctdelay::cli
