#include "farrkit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "farrkit/aggregate.hpp"
#include "farrkit/config.hpp"
#include "farrkit/convgen.hpp"
#include "farrkit/harness.hpp"
#include "farrkit/judging.hpp"
#include "farrkit/report.hpp"
#include "internal_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace farrkit {
namespace {

struct Opts {
    std::string config;
    std::string flows;
    std::string cache_dir;
    std::string mode;
    int target = 0;  // 0 = command default / config list
};

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                       c == '-' || c == '_'
                   ? c
                   : '_';
    return out.empty() ? std::string("_") : out;
}

RunConfig load_cfg(const Opts& o) {
    RunConfig cfg = load_run_config(o.config);
    if (!o.mode.empty()) cfg.mode = cache_mode_from_string(o.mode);
    if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
    return cfg;
}

fs::path flows_dir(const RunConfig& cfg, const Opts& o) {
    return o.flows.empty() ? fs::path(cfg.out_dir) / "flows" : fs::path(o.flows);
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool dirs_only) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (dirs_only ? e.is_directory() : e.is_regular_file())
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// ---- extraction / convgen re-ask loops ----

std::vector<ChatMessage> opening(ChatClient& client, const std::string& user) {
    std::vector<ChatMessage> messages;
    if (!client.system_prompt().empty())
        messages.push_back({Role::System, client.system_prompt()});
    messages.push_back({Role::User, user});
    return messages;
}

std::vector<FarrStep> extract_chunk_steps(ChatClient& client,
                                          const Chunk& chunk, int retries) {
    auto messages = opening(client, build_extraction_prompt(chunk));
    std::string last_err;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        std::string reply = client.complete(messages);
        try {
            return parse_farr_steps(reply);
        } catch (const MalformedOutput& e) {
            last_err = e.what();
        } catch (const SchemaViolation& e) {
            last_err = e.what();
        }
        messages.push_back({Role::Assistant, reply});
        messages.push_back(
            {Role::User,
             "Your previous reply could not be parsed (" + last_err +
                 "). Reply again with only a JSON array of step objects, each "
                 "carrying exactly the string fields \"findings\", \"action\", "
                 "\"reasoning\" and \"result\"."});
    }
    throw MalformedOutput("extraction failed after " +
                          std::to_string(retries + 1) +
                          " attempts: " + last_err);
}

std::vector<ConversationTurn> convgen_chunk_turns(ChatClient& client,
                                                  const Chunk& chunk,
                                                  int retries) {
    auto messages = opening(client, build_conversation_prompt(chunk));
    std::string last_err;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        std::string reply = client.complete(messages);
        try {
            return parse_conversation(reply);
        } catch (const NoTurnsFound& e) {
            last_err = e.what();
        }
        messages.push_back({Role::Assistant, reply});
        messages.push_back(
            {Role::User,
             "Your previous reply had no recognizable speaker turns (" +
                 last_err +
                 "). Reply again as alternating labelled lines, e.g. "
                 "\"NP: <question>\" and \"EP: <answer>\"."});
    }
    throw NoTurnsFound("conversation generation failed after " +
                       std::to_string(retries + 1) + " attempts: " + last_err);
}

// ---- persisted JSON shapes ----

json answers_to_json(const FlowAnswers& fa) {
    json arr = json::array();
    for (const auto& a : fa.answers)
        arr.push_back({{"step_index", a.step_index},
                       {"model_answer", a.model_answer},
                       {"failed", a.failed},
                       {"error", a.error}});
    return {{"machine", fa.machine},
            {"difficulty", to_string(fa.difficulty)},
            {"model_id", fa.model_id},
            {"contract_version", kHintContractVersion},
            {"answers", arr}};
}

json evals_to_json(const FlowEvaluations& fe) {
    json arr = json::array();
    for (const auto& e : fe.evaluations) {
        json scores = nullptr;
        if (e.scores)
            scores = {{"outcome", e.scores->outcome},
                      {"service", e.scores->service},
                      {"vulnerability", e.scores->vulnerability}};
        arr.push_back({{"step_index", e.step_index},
                       {"answer", e.answer.model_answer},
                       {"answer_failed", e.answer.failed},
                       {"scores", scores},
                       {"failure_reason", e.failure_reason},
                       {"judge_id", e.judge_id}});
    }
    return {{"machine", fe.machine},
            {"difficulty", to_string(fe.difficulty)},
            {"model_id", fe.model_id},
            {"judge_id", fe.judge_id},
            {"judge_template_version", kJudgeTemplateVersion},
            {"evaluations", arr}};
}

FlowEvaluations evals_from_json(const json& doc, const std::string& what) {
    FlowEvaluations fe;
    try {
        fe.machine = doc.at("machine").get<std::string>();
        fe.difficulty =
            difficulty_from_string(doc.at("difficulty").get<std::string>());
        fe.model_id = doc.at("model_id").get<std::string>();
        fe.judge_id = doc.at("judge_id").get<std::string>();
        for (const auto& e : doc.at("evaluations")) {
            StepEvaluation ev;
            ev.step_index = e.at("step_index").get<int>();
            ev.answer.step_index = ev.step_index;
            ev.answer.model_answer = e.at("answer").get<std::string>();
            ev.answer.failed = e.value("answer_failed", false);
            ev.answer.model_id = fe.model_id;
            if (!e.at("scores").is_null())
                ev.scores = AspectScores{
                    e.at("scores").at("outcome").get<int>(),
                    e.at("scores").at("service").get<int>(),
                    e.at("scores").at("vulnerability").get<int>()};
            ev.failure_reason = e.value("failure_reason", std::string());
            ev.judge_id = fe.judge_id;
            fe.evaluations.push_back(std::move(ev));
        }
    } catch (const json::exception& e) {
        throw SchemaViolation(what + ": " + e.what());
    }
    return fe;
}

void write_json_file(const fs::path& file, const json& doc) {
    detail::write_file_atomic(file, doc.dump(2) + "\n");
}

// ---- subcommands ----

int cmd_chunk(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    auto metas = load_metadata(cfg.metadata_file);
    fs::path chunk_dir = fs::path(cfg.out_dir) / "chunks";
    std::vector<int> targets =
        o.target > 0 ? std::vector<int>{o.target} : cfg.chunk_targets;
    for (const auto& meta : metas) {
        WriteupDocument doc = load_writeup(cfg.corpus_dir, meta);
        for (int t : targets) {
            auto chunks = chunk_document(doc, t);
            json arr = json::array();
            for (const auto& c : chunks) {
                json path = json::array();
                for (const auto& h : c.header_path)
                    path.push_back(render_header_line(h));
                arr.push_back({{"index", c.index},
                               {"header_path", path},
                               {"token_estimate", c.token_estimate},
                               {"payload", c.payload}});
            }
            write_json_file(chunk_dir / (sanitize(meta.name) + ".target" +
                                         std::to_string(t) + ".chunks.json"),
                            {{"machine", meta.name},
                             {"target_tokens", t},
                             {"chunks", arr}});
            std::cout << "machine=" << meta.name << " target=" << t
                      << " chunks=" << chunks.size() << "\n";
        }
    }
    return 0;
}

int cmd_extract(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    if (!cfg.extractor)
        throw ConfigError("extract requires an \"extractor\" endpoint");
    EndpointClient client(*cfg.extractor, cfg.mode, cfg.cache_dir);
    auto metas = load_metadata(cfg.metadata_file);
    fs::path dir = flows_dir(cfg, o);
    int target = o.target > 0 ? o.target : 2000;
    int written = 0;
    for (const auto& meta : metas) {
        WriteupDocument doc = load_writeup(cfg.corpus_dir, meta);
        auto chunks = chunk_document(doc, target);
        std::vector<std::vector<FarrStep>> per_chunk;
        for (const auto& chunk : chunks) {
            try {
                per_chunk.push_back(
                    extract_chunk_steps(client, chunk, cfg.extract_retries));
            } catch (const MalformedOutput& e) {
                std::cerr << "[warn] machine=" << meta.name
                          << " chunk=" << chunk.index
                          << " skipped: " << e.what() << "\n";
            }
        }
        FarrFlow flow;
        try {
            flow = assemble_flow(meta.name, meta.difficulty,
                                 meta.vulnerability_topics, per_chunk);
        } catch (const EmptyFlow& e) {
            std::cerr << "[warn] machine=" << meta.name
                      << " skipped: " << e.what() << "\n";
            continue;
        }
        for (const auto& f : lint_flow(flow))
            std::cerr << "[lint] machine=" << flow.machine
                      << " step=" << f.step_index
                      << " code=" << to_string(f.code)
                      << " severity="
                      << (lint_is_warning(f.code) ? "warning" : "error") << " "
                      << f.message << "\n";
        save_flow(flow, dir);
        ++written;
        std::cout << "machine=" << meta.name << " chunks=" << chunks.size()
                  << " steps=" << flow.steps.size() << "\n";
    }
    if (written == 0) throw FarrkitError("extraction produced no flows");
    return 0;
}

int cmd_lint(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    auto flows = load_flows(flows_dir(cfg, o));
    if (flows.empty())
        throw FarrkitError("no flows found in " + flows_dir(cfg, o).string());
    int errors = 0, warnings = 0;
    for (const auto& flow : flows)
        for (const auto& f : lint_flow(flow)) {
            bool warn = lint_is_warning(f.code);
            (warn ? warnings : errors)++;
            std::cout << "machine=" << flow.machine << " step=" << f.step_index
                      << " code=" << to_string(f.code)
                      << " severity=" << (warn ? "warning" : "error") << " "
                      << f.message << "\n";
        }
    std::cout << "errors=" << errors << " warnings=" << warnings << "\n";
    return errors > 0 ? 1 : 0;
}

int cmd_evaluate(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    if (cfg.models.empty())
        throw ConfigError("evaluate requires at least one entry in \"models\"");
    if (cfg.judges.empty())
        throw ConfigError("evaluate requires at least one entry in \"judges\"");
    auto flows = load_flows(flows_dir(cfg, o));
    if (flows.empty())
        throw FarrkitError("no flows found in " + flows_dir(cfg, o).string());

    for (const auto& model_cfg : cfg.models) {
        EndpointClient model(model_cfg, cfg.mode, cfg.cache_dir);
        auto answers = evaluate_corpus(flows, model, cfg.workers);
        fs::path model_dir =
            fs::path(cfg.out_dir) / "answers" / sanitize(model_cfg.model_id);
        int failed = 0;
        for (const auto& fa : answers) {
            for (const auto& a : fa.answers) failed += a.failed;
            write_json_file(model_dir / ("Machine_" + sanitize(fa.machine) +
                                         "_answers.json"),
                            answers_to_json(fa));
        }
        std::cout << "model=" << model_cfg.model_id
                  << " machines=" << answers.size() << " failed_steps=" << failed
                  << "\n";

        for (const auto& judge_cfg : cfg.judges) {
            EndpointClient judge(judge_cfg, cfg.mode, cfg.cache_dir);
            fs::path judge_dir = fs::path(cfg.out_dir) / "evaluations" /
                                 sanitize(model_cfg.model_id) /
                                 sanitize(judge_cfg.model_id);
            int judged = 0, rejected = 0;
            for (size_t i = 0; i < flows.size(); ++i) {
                FlowEvaluations fe =
                    judge_flow(flows[i], answers[i], judge, cfg.workers);
                for (const auto& e : fe.evaluations)
                    (e.failed() ? rejected : judged)++;
                write_json_file(
                    judge_dir / ("Machine_" + sanitize(fe.machine) +
                                 "_eval.json"),
                    evals_to_json(fe));
            }
            std::cout << "judge=" << judge_cfg.model_id
                      << " model=" << model_cfg.model_id << " judged=" << judged
                      << " failed=" << rejected << "\n";
        }
    }
    return 0;
}

int cmd_report(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    fs::path eval_root = fs::path(cfg.out_dir) / "evaluations";

    // judge label -> model id -> per-machine reports
    std::map<std::string, std::map<std::string, std::vector<MachineReport>>>
        per_judge;
    for (const auto& model_dir : sorted_entries(eval_root, true))
        for (const auto& judge_dir : sorted_entries(model_dir, true))
            for (const auto& file : sorted_entries(judge_dir, false)) {
                if (file.extension() != ".json") continue;
                json doc = json::parse(detail::read_file(file), nullptr, false);
                if (doc.is_discarded())
                    throw SchemaViolation(file.string() + ": not valid JSON");
                FlowEvaluations fe = evals_from_json(doc, file.string());
                try {
                    per_judge[fe.judge_id][fe.model_id].push_back(
                        machine_report(fe));
                } catch (const AllStepsFailed& e) {
                    std::cerr << "[warn] " << file.string()
                              << " excluded: " << e.what() << "\n";
                }
            }
    if (per_judge.empty())
        throw FarrkitError("no evaluations found under " + eval_root.string());

    std::vector<std::pair<std::string, ReportBundle>> bundles;
    for (const auto& [judge, per_model] : per_judge) {
        ReportBundle b;
        b.rows = leaderboard(per_model);
        b.difficulties = difficulty_table(per_model);
        b.machines_per_model = per_model;
        bundles.emplace_back(judge, std::move(b));
    }
    size_t primary = 0;
    if (!cfg.judges.empty())
        for (size_t i = 0; i < bundles.size(); ++i)
            if (bundles[i].first == cfg.judges[0].model_id) primary = i;

    std::string corpus_blob;
    for (const auto& file : sorted_entries(flows_dir(cfg, o), false))
        corpus_blob += detail::read_file(file);

    RunManifest manifest;
    manifest.corpus_digest = sha256_hex(corpus_blob);
    auto summarize = [](const std::string& role, const EndpointConfig& e) {
        return EndpointSummary{role,          e.base_url,  e.model_id,
                               e.api_key_env, e.temperature, e.max_tokens,
                               e.system_prompt};
    };
    if (cfg.extractor)
        manifest.endpoints.push_back(summarize("extractor", *cfg.extractor));
    for (const auto& m : cfg.models)
        manifest.endpoints.push_back(summarize("model", m));
    for (const auto& j : cfg.judges)
        manifest.endpoints.push_back(summarize("judge", j));
    manifest.judge_template_version = kJudgeTemplateVersion;
    manifest.separator_contract_version = kHintContractVersion;
    manifest.aggregation_note =
        "aspect columns are unweighted means over per-machine averages; "
        "total_avg is the mean of the three columns; failed steps are "
        "excluded from means and counted in n_failed";
    manifest.judge_selection = "leaderboard.csv and leaderboard.json use judge "
                               "'" +
                               bundles[primary].first +
                               "'; report.md carries one section per judge";
    manifest.mode = to_string(cfg.mode);
    manifest.timestamp =
        cfg.mode == CacheMode::Replay ? "" : detail::iso_utc_now();

    fs::path report_dir = fs::path(cfg.out_dir) / "reports";
    write_report_files(report_dir, bundles, primary, manifest);
    std::cout << "wrote " << (report_dir / "report.md").string() << "\n"
              << "wrote " << (report_dir / "leaderboard.csv").string() << "\n"
              << "wrote " << (report_dir / "leaderboard.json").string() << "\n"
              << "wrote " << (report_dir / "manifest.json").string() << "\n";
    return 0;
}

int cmd_convgen(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    if (!cfg.extractor)
        throw ConfigError("convgen requires an \"extractor\" endpoint");
    EndpointClient client(*cfg.extractor, cfg.mode, cfg.cache_dir);
    auto metas = load_metadata(cfg.metadata_file);
    fs::path conv_dir = fs::path(cfg.out_dir) / "conversations";
    int target = o.target > 0 ? o.target : 500;
    int written = 0;
    for (const auto& meta : metas) {
        WriteupDocument doc = load_writeup(cfg.corpus_dir, meta);
        auto chunks = chunk_document(doc, target);
        std::vector<std::vector<ConversationTurn>> per_chunk;
        for (const auto& chunk : chunks) {
            try {
                per_chunk.push_back(
                    convgen_chunk_turns(client, chunk, cfg.extract_retries));
            } catch (const NoTurnsFound& e) {
                std::cerr << "[warn] machine=" << meta.name
                          << " chunk=" << chunk.index
                          << " skipped: " << e.what() << "\n";
            }
        }
        ConversationSession session;
        try {
            session = assemble_session(meta.name, per_chunk);
        } catch (const EmptySession& e) {
            std::cerr << "[warn] machine=" << meta.name
                      << " skipped: " << e.what() << "\n";
            continue;
        }
        detail::write_file_atomic(
            conv_dir / (sanitize(meta.name) + ".chatml.txt"),
            emit_chatml(session));
        json turns = json::array();
        for (const auto& t : session.turns)
            turns.push_back({{"role", to_string(t.role)}, {"content", t.content}});
        write_json_file(conv_dir / (sanitize(meta.name) + ".conversation.json"),
                        {{"machine", session.machine},
                         {"system_prompt", session.system_prompt.empty()
                                               ? kDefaultSystemPrompt
                                               : session.system_prompt},
                         {"turns", turns}});
        ++written;
        std::cout << "machine=" << meta.name << " turns=" << session.turns.size()
                  << "\n";
    }
    if (written == 0) throw FarrkitError("convgen produced no conversations");
    return 0;
}

int cmd_stats(const Opts& o) {
    RunConfig cfg = load_cfg(o);
    auto flows = load_flows(flows_dir(cfg, o));
    CorpusStats s = corpus_stats(flows);
    std::cout << "n_machines=" << s.n_machines << "\n"
              << "n_questions=" << s.n_questions << "\n";
    for (const auto& [k, v] : s.difficulty_histogram)
        std::cout << "difficulty." << k << "=" << v << "\n";
    for (const auto& [k, v] : s.topic_histogram)
        std::cout << "topic." << k << "=" << v << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"FARR Flow pentesting benchmark toolkit"};
    app.name("farr-kit");
    app.require_subcommand(1);

    Opts o;
    auto add_common = [&](CLI::App* sub, bool with_target) {
        sub->add_option("-c,--config", o.config, "run config JSON file")
            ->required();
        sub->add_option("--mode", o.mode, "cache mode override")
            ->check(CLI::IsMember({"live", "record", "replay"}));
        sub->add_option("--cache-dir", o.cache_dir, "cache directory override");
        sub->add_option("--flows", o.flows, "flows directory override");
        if (with_target)
            sub->add_option("-t,--target", o.target, "token budget override")
                ->check(CLI::PositiveNumber);
    };

    int rc = 0;
    auto wire = [&](const char* name, const char* help, bool with_target,
                    int (*fn)(const Opts&)) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, with_target);
        sub->callback([&o, &rc, fn] { rc = fn(o); });
        return sub;
    };

    wire("chunk", "split write-ups into token-budgeted chunks", true,
         cmd_chunk);
    wire("extract", "extract FARR flows from write-ups via the extractor "
                    "endpoint",
         true, cmd_extract);
    wire("lint", "lint stored flows for leakage and empty fields", false,
         cmd_lint);
    wire("evaluate", "run the next-step benchmark and judge the answers",
         false, cmd_evaluate);
    wire("report", "aggregate evaluations into leaderboard reports", false,
         cmd_report);
    wire("convgen", "generate novice/expert training conversations", true,
         cmd_convgen);
    wire("stats", "print corpus statistics from stored flows", false,
         cmd_stats);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace farrkit
