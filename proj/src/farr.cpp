#include "farrkit/farr.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>

#include "json.hpp"

#include "internal_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace farrkit {

namespace {

bool contains_ci(const std::string& hay, const std::string& needle) {
    auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower((unsigned char)a) ==
                                     std::tolower((unsigned char)b);
                          });
    return it != hay.end();
}

// Case-insensitive phrase match with word boundaries ("should" never matches
// inside "shoulder").
bool contains_phrase_ci(const std::string& hay, const std::string& phrase) {
    if (phrase.empty() || hay.size() < phrase.size()) return false;
    for (size_t i = 0; i + phrase.size() <= hay.size(); ++i) {
        bool match = true;
        for (size_t k = 0; k < phrase.size(); ++k) {
            if (std::tolower((unsigned char)hay[i + k]) !=
                std::tolower((unsigned char)phrase[k])) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        bool left_ok = i == 0 || !std::isalnum((unsigned char)hay[i - 1]);
        size_t end = i + phrase.size();
        bool right_ok = end == hay.size() || !std::isalnum((unsigned char)hay[end]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

}  // namespace

std::string to_string(LintCode c) {
    switch (c) {
        case LintCode::AuthorLeak: return "AuthorLeak";
        case LintCode::EmptyField: return "EmptyField";
        case LintCode::HintLeak: return "HintLeak";
    }
    return "AuthorLeak";
}

bool lint_is_warning(LintCode c) { return c == LintCode::HintLeak; }

std::string build_extraction_prompt(const Chunk& chunk) {
    std::string prompt = chunk.payload;
    prompt +=
        "\n\n----\n\n"
        "Extract every penetration testing step described in the write-up "
        "above as a JSON array.\n"
        "Each array element must be an object with exactly these four string "
        "keys:\n"
        "\"findings\": what is known or has been discovered at that point,\n"
        "\"action\": what was done next,\n"
        "\"reasoning\": why that action was the right choice,\n"
        "\"result\": what the action produced.\n"
        "Write each step so it is generalized and self-contained without "
        "referring to this context.\n"
        "Never use phrases like \"the author\" or mention the write-up "
        "itself.\n"
        "Output only the JSON array.";
    return prompt;
}

std::vector<FarrStep> parse_farr_steps(const std::string& llm_output) {
    static const char* kKeys[] = {"findings", "action", "reasoning", "result"};
    for (size_t i = 0; i < llm_output.size(); ++i) {
        if (llm_output[i] != '[') continue;
        size_t end = detail::match_balanced(llm_output, i);
        if (end == std::string::npos) continue;
        json arr = json::parse(llm_output.substr(i, end - i), nullptr, false);
        if (arr.is_discarded() || !arr.is_array()) continue;
        // Arrays with no objects (e.g. "[1]" inside prose) are not step
        // arrays; keep scanning. An empty array is a valid zero-step reply.
        bool has_object = std::any_of(arr.begin(), arr.end(),
                                      [](const json& e) { return e.is_object(); });
        if (!arr.empty() && !has_object) continue;

        std::vector<FarrStep> steps;
        for (size_t idx = 0; idx < arr.size(); ++idx) {
            const json& e = arr[idx];
            if (!e.is_object())
                throw SchemaViolation("step " + std::to_string(idx) +
                                      " is not an object");
            FarrStep step;
            std::string* slots[] = {&step.findings, &step.action,
                                    &step.reasoning, &step.result};
            for (int k = 0; k < 4; ++k) {
                if (!e.contains(kKeys[k]) || !e[kKeys[k]].is_string())
                    throw SchemaViolation("step " + std::to_string(idx) +
                                          " missing string field '" +
                                          kKeys[k] + "'");
                *slots[k] = e[kKeys[k]].get<std::string>();
                if (slots[k]->empty())
                    throw SchemaViolation("step " + std::to_string(idx) +
                                          " has empty field '" + kKeys[k] +
                                          "'");
            }
            steps.push_back(std::move(step));
        }
        return steps;
    }
    throw MalformedOutput("no JSON array found in model output");
}

std::vector<LintFinding> lint_flow(const FarrFlow& flow) {
    std::vector<LintFinding> findings;
    for (size_t i = 0; i < flow.steps.size(); ++i) {
        const FarrStep& s = flow.steps[i];
        const std::pair<const char*, const std::string*> fields[] = {
            {"findings", &s.findings},
            {"action", &s.action},
            {"reasoning", &s.reasoning},
            {"result", &s.result},
        };
        for (const auto& [name, value] : fields) {
            if (contains_ci(*value, "the author"))
                findings.push_back({(int)i, LintCode::AuthorLeak,
                                    std::string("field '") + name +
                                        "' mentions \"the author\""});
            if (value->find_first_not_of(" \t\r\n") == std::string::npos)
                findings.push_back({(int)i, LintCode::EmptyField,
                                    std::string("field '") + name +
                                        "' is empty"});
        }
        if (contains_phrase_ci(s.findings, "need to") ||
            contains_phrase_ci(s.findings, "should"))
            findings.push_back({(int)i, LintCode::HintLeak,
                                "findings contain imperative phrasing that "
                                "pre-answers the reasoning"});
    }
    return findings;
}

FarrFlow assemble_flow(const std::string& machine, Difficulty difficulty,
                       const std::vector<std::string>& vulnerability_topics,
                       const std::vector<std::vector<FarrStep>>& per_chunk_steps) {
    FarrFlow flow;
    flow.machine = machine;
    flow.difficulty = difficulty;
    flow.vulnerability_topics = vulnerability_topics;
    for (const auto& chunk_steps : per_chunk_steps)
        flow.steps.insert(flow.steps.end(), chunk_steps.begin(),
                          chunk_steps.end());
    if (flow.steps.empty())
        throw EmptyFlow("no steps extracted for machine " + machine);
    return flow;
}

std::string flow_file_name(const std::string& machine) {
    return "Machine_" + machine + "_FARR_flow.json";
}

namespace {

json flow_to_json(const FarrFlow& flow) {
    json steps = json::array();
    for (const auto& s : flow.steps)
        steps.push_back({{"findings", s.findings},
                         {"action", s.action},
                         {"reasoning", s.reasoning},
                         {"result", s.result}});
    json j = {{"machine", flow.machine},
              {"difficulty", to_string(flow.difficulty)},
              {"steps", steps}};
    if (!flow.vulnerability_topics.empty())
        j["vulnerability_topics"] = flow.vulnerability_topics;
    return j;
}

FarrFlow flow_from_json(const json& j, const std::string& origin) {
    if (!j.is_object() || !j.contains("machine") || !j["machine"].is_string())
        throw SchemaViolation(origin + ": missing string field 'machine'");
    if (!j.contains("difficulty") || !j["difficulty"].is_string())
        throw SchemaViolation(origin + ": missing string field 'difficulty'");
    if (!j.contains("steps") || !j["steps"].is_array())
        throw SchemaViolation(origin + ": missing array field 'steps'");

    FarrFlow flow;
    flow.machine = j["machine"].get<std::string>();
    flow.difficulty = difficulty_from_string(j["difficulty"].get<std::string>());
    for (const auto& e : j["steps"]) {
        static const char* kKeys[] = {"findings", "action", "reasoning",
                                      "result"};
        FarrStep step;
        std::string* slots[] = {&step.findings, &step.action, &step.reasoning,
                                &step.result};
        for (int k = 0; k < 4; ++k) {
            if (!e.is_object() || !e.contains(kKeys[k]) ||
                !e[kKeys[k]].is_string())
                throw SchemaViolation(origin + ": step missing string field '" +
                                      kKeys[k] + "'");
            *slots[k] = e[kKeys[k]].get<std::string>();
        }
        flow.steps.push_back(std::move(step));
    }
    if (flow.steps.empty())
        throw SchemaViolation(origin + ": flow has no steps");
    if (j.contains("vulnerability_topics")) {
        if (!j["vulnerability_topics"].is_array())
            throw SchemaViolation(origin +
                                  ": 'vulnerability_topics' must be an array");
        for (const auto& t : j["vulnerability_topics"])
            flow.vulnerability_topics.push_back(t.get<std::string>());
    }
    return flow;
}

}  // namespace

void save_flow(const FarrFlow& flow, const fs::path& dir) {
    detail::write_file_atomic(dir / flow_file_name(flow.machine),
                              flow_to_json(flow).dump(2) + "\n");
}

FarrFlow load_flow(const fs::path& file) {
    std::string text = detail::read_file(file);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw SchemaViolation(file.string() + ": not valid JSON");
    return flow_from_json(j, file.string());
}

std::vector<FarrFlow> load_flows(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.rfind("Machine_", 0) == 0 &&
            name.size() > 23 /* prefix+suffix */ &&
            name.find("_FARR_flow.json") != std::string::npos)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<FarrFlow> flows;
    for (const auto& f : files) flows.push_back(load_flow(f));
    return flows;
}

}  // namespace farrkit
