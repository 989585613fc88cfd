#pragma once

#include <filesystem>
#include <string>
#include <vector>

struct Criterion {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

void print_criterion(const Criterion& c);

/// Criteria 6-10: grows the desk database, trains, analyzes, extracts
/// families, designs and assembles, then reruns a reduced pipeline twice.
std::vector<Criterion> desk_criteria(const std::filesystem::path& out, const std::filesystem::path& desk_config,
                                     const std::filesystem::path& smoke_config);
