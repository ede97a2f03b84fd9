#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "farrkit/corpus.hpp"

namespace farrkit {

struct FarrStep {
    std::string findings;
    std::string action;
    std::string reasoning;
    std::string result;

    bool operator==(const FarrStep&) const = default;
};

struct FarrFlow {
    std::string machine;
    Difficulty difficulty = Difficulty::Easy;
    std::vector<FarrStep> steps;
    std::vector<std::string> vulnerability_topics;  // operator-supplied metadata

    bool operator==(const FarrFlow&) const = default;
};

enum class LintCode { AuthorLeak, EmptyField, HintLeak };

std::string to_string(LintCode c);

// HintLeak is a warning; the other two are errors.
bool lint_is_warning(LintCode c);

struct LintFinding {
    int step_index = 0;
    LintCode code = LintCode::AuthorLeak;
    std::string message;
};

std::string build_extraction_prompt(const Chunk& chunk);

// Finds the first JSON array in the output (code fences and surrounding prose
// tolerated) and validates the four string fields per element.
// Throws MalformedOutput / SchemaViolation.
std::vector<FarrStep> parse_farr_steps(const std::string& llm_output);

std::vector<LintFinding> lint_flow(const FarrFlow& flow);

FarrFlow assemble_flow(const std::string& machine, Difficulty difficulty,
                       const std::vector<std::string>& vulnerability_topics,
                       const std::vector<std::vector<FarrStep>>& per_chunk_steps);

std::string flow_file_name(const std::string& machine);

void save_flow(const FarrFlow& flow, const std::filesystem::path& dir);
FarrFlow load_flow(const std::filesystem::path& file);

// All flow files (Machine_*_FARR_flow.json) in a directory, sorted by file name.
std::vector<FarrFlow> load_flows(const std::filesystem::path& dir);

}  // namespace farrkit
