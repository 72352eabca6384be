#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lodeq::cli {

struct Record {
    std::string key;
    std::string value;
};

struct Diagnostic {
    std::string code;
    std::string message;
};

struct RunReport {
    std::string command;
    // FNV-1a over the input files, 16 hex digits.
    std::string digest;
    std::vector<Record> outputs;
    std::vector<Diagnostic> diagnostics;
    int exit_code = 0;
    std::string format = "text";
};

// args excludes the program name.
RunReport run(const std::vector<std::string>& args);
std::string render(const RunReport& report);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace lodeq::cli
