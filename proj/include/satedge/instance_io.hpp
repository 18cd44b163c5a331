#pragma once

#include <string>
#include <string_view>

#include "satedge/offload_problem.hpp"

namespace satedge {

inline constexpr int instance_format_version = 1;

/// JSON document {"format": "satedge-instance", "version": 1, ...}. Doubles
/// are written with round-trip precision, so load(dump(x)) == x bit for bit.
std::string dump_instance(const ProblemInstance& instance);
ProblemInstance parse_instance(std::string_view text);

void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

std::string dump_solution(const Solution& solution);
Solution parse_solution(std::string_view text);

} // namespace satedge
