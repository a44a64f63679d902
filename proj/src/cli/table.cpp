#include "ctdelay/cli/table.hpp"

#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>

#include "ctdelay/errors.hpp"

namespace ctdelay::cli {

std::string Table::render() const
{
    std::string out;
    for (const auto& [key, value] : metadata) {
        out += fmt::format("# {}: {}\n", key, value);
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        out += (c ? "," : "") + header[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += fmt::format("{}{:.17g}", c ? "," : "", row[c]);
        }
        out += '\n';
    }
    return out;
}

void write_atomically(const std::string& path, const std::string& text)
{
    const std::filesystem::path target(path);
    if (target.has_parent_path()) {
        std::filesystem::create_directories(target.parent_path());
    }
    const std::filesystem::path temporary = target.string() + ".tmp";
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError(fmt::format("cannot write '{}'", temporary.string()));
        }
        out << text;
        out.flush();
        if (!out) {
            throw ValidationError(fmt::format("failed writing '{}'", temporary.string()));
        }
    }
    std::filesystem::rename(temporary, target);
}

} // namespace ctdelay::cli
