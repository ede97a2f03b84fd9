#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "farrkit/aggregate.hpp"

namespace farrkit {

struct EndpointSummary {
    std::string role;  // extractor | model | judge
    std::string base_url;
    std::string model_id;
    std::string api_key_env;  // the env var *name*; the key itself never lands here
    double temperature = 0;
    int max_tokens = 0;
    std::string system_prompt;
};

// Everything needed to re-run byte-identically in replay mode.
struct RunManifest {
    std::string corpus_digest;
    std::vector<EndpointSummary> endpoints;
    std::string judge_template_version;
    std::string separator_contract_version;
    std::string aggregation_note;
    std::string judge_selection;  // which judge feeds leaderboard.csv/json
    std::string mode;
    std::string timestamp;  // empty renders as null (replay runs)
};

struct ReportBundle {
    std::vector<LeaderboardRow> rows;
    std::vector<DifficultyReport> difficulties;
    std::map<std::string, std::vector<MachineReport>> machines_per_model;
};

enum class ReportFormat { Markdown, Csv, Json };

// Markdown renders 2 decimals, rows ascending by the final column; CSV/JSON
// carry full precision (CSV is the leaderboard table only).
std::string render_report(const ReportBundle& bundle, ReportFormat format);

ReportBundle bundle_from_json(const std::string& text);

std::string render_manifest(const RunManifest& manifest);

std::string format2(double v);  // fixed 2-decimal rendering

// report.md (one section per judge), leaderboard.csv / leaderboard.json from
// the primary bundle, manifest.json.
void write_report_files(
    const std::filesystem::path& dir,
    const std::vector<std::pair<std::string, ReportBundle>>& per_judge,
    size_t primary_index, const RunManifest& manifest);

}  // namespace farrkit
