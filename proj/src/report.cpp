#include "farrkit/report.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

#include "internal_util.hpp"

using nlohmann::json;

namespace farrkit {

std::string format2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<LeaderboardRow> sorted_rows(std::vector<LeaderboardRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.total_avg != b.total_avg ? a.total_avg < b.total_avg
                                          : a.model_id < b.model_id;
    });
    return rows;
}

std::vector<DifficultyReport> sorted_difficulties(
    std::vector<DifficultyReport> reps) {
    std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
        return a.average != b.average ? a.average < b.average
                                      : a.model_id < b.model_id;
    });
    return reps;
}

std::string cell(const std::optional<double>& v) {
    return v ? format2(*v) : "n/a";
}

std::string render_markdown(const ReportBundle& b) {
    std::string out;
    out += "### Leaderboard\n\n";
    out += "| Model | Outcome | Service | Vulnerability | Total Avg |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& r : sorted_rows(b.rows))
        out += "| " + r.model_id + " | " + format2(r.outcome) + " | " +
               format2(r.service) + " | " + format2(r.vulnerability) + " | " +
               format2(r.total_avg) + " |\n";
    out += "\n### Performance by Machine Difficulty\n\n";
    out += "| Model | Easy | Medium | Hard | Insane | Average |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& d : sorted_difficulties(b.difficulties))
        out += "| " + d.model_id + " | " + cell(d.easy) + " | " +
               cell(d.medium) + " | " + cell(d.hard) + " | " + cell(d.insane) +
               " | " + format2(d.average) + " |\n";
    for (const auto& [model, machines] : b.machines_per_model) {
        out += "\n### Machines: " + model + "\n\n";
        out += "| Machine | Difficulty | Steps | Failed | Outcome | Service | "
               "Vulnerability | Machine Avg |\n";
        out += "|---|---|---|---|---|---|---|---|\n";
        auto sorted = machines;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) {
                      return a.machine < b.machine;
                  });
        for (const auto& m : sorted)
            out += "| " + m.machine + " | " + to_string(m.difficulty) + " | " +
                   std::to_string(m.n_steps) + " | " +
                   std::to_string(m.n_failed) + " | " + format2(m.outcome_avg) +
                   " | " + format2(m.service_avg) + " | " +
                   format2(m.vulnerability_avg) + " | " +
                   format2(m.machine_avg) + " |\n";
    }
    return out;
}

std::string render_csv(const ReportBundle& b) {
    std::string out = "model_id,outcome,service,vulnerability,total_avg\n";
    for (const auto& r : sorted_rows(b.rows))
        out += csv_field(r.model_id) + "," + csv_num(r.outcome) + "," +
               csv_num(r.service) + "," + csv_num(r.vulnerability) + "," +
               csv_num(r.total_avg) + "\n";
    return out;
}

json difficulty_json(const DifficultyReport& d) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return {{"model_id", d.model_id}, {"easy", opt(d.easy)},
            {"medium", opt(d.medium)}, {"hard", opt(d.hard)},
            {"insane", opt(d.insane)}, {"average", d.average}};
}

std::string render_json(const ReportBundle& b) {
    json rows = json::array();
    for (const auto& r : sorted_rows(b.rows))
        rows.push_back({{"model_id", r.model_id},
                        {"outcome", r.outcome},
                        {"service", r.service},
                        {"vulnerability", r.vulnerability},
                        {"total_avg", r.total_avg}});
    json diffs = json::array();
    for (const auto& d : sorted_difficulties(b.difficulties))
        diffs.push_back(difficulty_json(d));
    json machines = json::object();
    for (const auto& [model, reports] : b.machines_per_model) {
        json arr = json::array();
        auto sorted = reports;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) {
                      return a.machine < b.machine;
                  });
        for (const auto& m : sorted)
            arr.push_back({{"machine", m.machine},
                           {"difficulty", to_string(m.difficulty)},
                           {"n_steps", m.n_steps},
                           {"n_failed", m.n_failed},
                           {"outcome_avg", m.outcome_avg},
                           {"service_avg", m.service_avg},
                           {"vulnerability_avg", m.vulnerability_avg},
                           {"machine_avg", m.machine_avg}});
        machines[model] = arr;
    }
    json doc = {{"leaderboard", rows},
                {"difficulty", diffs},
                {"machines", machines}};
    return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const ReportBundle& bundle, ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return render_markdown(bundle);
        case ReportFormat::Csv: return render_csv(bundle);
        case ReportFormat::Json: return render_json(bundle);
    }
    return "";
}

ReportBundle bundle_from_json(const std::string& text) {
    json doc = json::parse(text);
    ReportBundle b;
    for (const auto& r : doc.at("leaderboard"))
        b.rows.push_back({r.at("model_id").get<std::string>(),
                          r.at("outcome").get<double>(),
                          r.at("service").get<double>(),
                          r.at("vulnerability").get<double>(),
                          r.at("total_avg").get<double>()});
    for (const auto& d : doc.at("difficulty")) {
        DifficultyReport rep;
        rep.model_id = d.at("model_id").get<std::string>();
        auto opt = [&](const char* k) -> std::optional<double> {
            if (d.at(k).is_null()) return std::nullopt;
            return d.at(k).get<double>();
        };
        rep.easy = opt("easy");
        rep.medium = opt("medium");
        rep.hard = opt("hard");
        rep.insane = opt("insane");
        rep.average = d.at("average").get<double>();
        b.difficulties.push_back(rep);
    }
    for (const auto& [model, arr] : doc.at("machines").items()) {
        std::vector<MachineReport> reports;
        for (const auto& m : arr) {
            MachineReport rep;
            rep.machine = m.at("machine").get<std::string>();
            rep.difficulty =
                difficulty_from_string(m.at("difficulty").get<std::string>());
            rep.n_steps = m.at("n_steps").get<int>();
            rep.n_failed = m.at("n_failed").get<int>();
            rep.outcome_avg = m.at("outcome_avg").get<double>();
            rep.service_avg = m.at("service_avg").get<double>();
            rep.vulnerability_avg = m.at("vulnerability_avg").get<double>();
            rep.machine_avg = m.at("machine_avg").get<double>();
            reports.push_back(rep);
        }
        b.machines_per_model[model] = std::move(reports);
    }
    return b;
}

std::string render_manifest(const RunManifest& manifest) {
    json endpoints = json::array();
    for (const auto& e : manifest.endpoints)
        endpoints.push_back({{"role", e.role},
                             {"base_url", e.base_url},
                             {"model_id", e.model_id},
                             {"api_key_env", e.api_key_env},
                             {"temperature", e.temperature},
                             {"max_tokens", e.max_tokens},
                             {"system_prompt", e.system_prompt}});
    json doc = {{"corpus_digest", manifest.corpus_digest},
                {"endpoints", endpoints},
                {"judge_template_version", manifest.judge_template_version},
                {"separator_contract_version",
                 manifest.separator_contract_version},
                {"aggregation_note", manifest.aggregation_note},
                {"judge_selection", manifest.judge_selection},
                {"mode", manifest.mode},
                {"timestamp", manifest.timestamp.empty()
                                  ? json(nullptr)
                                  : json(manifest.timestamp)}};
    return doc.dump(2) + "\n";
}

void write_report_files(
    const std::filesystem::path& dir,
    const std::vector<std::pair<std::string, ReportBundle>>& per_judge,
    size_t primary_index, const RunManifest& manifest) {
    if (per_judge.empty()) throw FarrkitError("no report bundles to write");
    if (primary_index >= per_judge.size())
        throw FarrkitError("primary bundle index out of range");

    std::string md = "# FARR Flow Benchmark Report\n";
    for (const auto& [judge, bundle] : per_judge) {
        md += "\n## Judge: " + judge + "\n\n";
        md += render_report(bundle, ReportFormat::Markdown);
    }
    const ReportBundle& primary = per_judge[primary_index].second;
    detail::write_file_atomic(dir / "report.md", md);
    detail::write_file_atomic(dir / "leaderboard.csv",
                              render_report(primary, ReportFormat::Csv));
    detail::write_file_atomic(dir / "leaderboard.json",
                              render_report(primary, ReportFormat::Json));
    detail::write_file_atomic(dir / "manifest.json", render_manifest(manifest));
}

}  // namespace farrkit
