#include "farrkit/config.hpp"

#include "json.hpp"

#include "internal_util.hpp"

using nlohmann::json;

namespace farrkit {

namespace {

json parse_or_throw(const std::string& text, const std::string& what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError(what + ": not valid JSON");
    return doc;
}

EndpointConfig parse_endpoint(const json& j, const std::string& what) {
    if (!j.is_object())
        throw ConfigError(what + ": endpoint must be a JSON object");
    if (j.contains("api_key"))
        throw ConfigError(what +
                          ": api_key must not appear in config files; "
                          "set api_key_env to an environment variable name");
    EndpointConfig cfg;
    try {
        cfg.base_url = j.at("base_url").get<std::string>();
        cfg.model_id = j.at("model_id").get<std::string>();
        cfg.api_key_env = j.value("api_key_env", std::string());
        cfg.temperature = j.value("temperature", 0.0);
        cfg.max_tokens = j.value("max_tokens", 1024);
        cfg.timeout_s = j.value("timeout_s", 60.0);
        cfg.max_retries = j.value("max_retries", 3);
        cfg.max_inflight = j.value("max_inflight", 4);
        cfg.system_prompt = j.value("system_prompt", std::string());
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
    if (cfg.base_url.empty())
        throw ConfigError(what + ": base_url must not be empty");
    if (cfg.model_id.empty())
        throw ConfigError(what + ": model_id must not be empty");
    if (cfg.max_tokens < 1)
        throw ConfigError(what + ": max_tokens must be positive");
    if (cfg.max_retries < 0)
        throw ConfigError(what + ": max_retries must not be negative");
    if (cfg.max_inflight < 1)
        throw ConfigError(what + ": max_inflight must be positive");
    return cfg;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    json doc = parse_or_throw(detail::read_file(path), path.string());
    if (!doc.is_object())
        throw ConfigError(path.string() + ": top level must be a JSON object");

    RunConfig cfg;
    try {
        cfg.corpus_dir = doc.at("corpus_dir").get<std::string>();
        cfg.metadata_file = doc.at("metadata_file").get<std::string>();
        if (doc.contains("out_dir"))
            cfg.out_dir = doc.at("out_dir").get<std::string>();
        if (doc.contains("chunk_targets")) {
            cfg.chunk_targets.clear();
            for (const auto& t : doc.at("chunk_targets"))
                cfg.chunk_targets.push_back(t.get<int>());
        }
        if (doc.contains("mode"))
            cfg.mode = cache_mode_from_string(doc.at("mode").get<std::string>());
        cfg.workers = doc.value("workers", 4);
        cfg.extract_retries = doc.value("extract_retries", 2);
        if (doc.contains("cache_dir"))
            cfg.cache_dir = doc.at("cache_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (cfg.cache_dir.empty())
        cfg.cache_dir =
            (std::filesystem::path(cfg.out_dir) / "cache").string();
    if (cfg.chunk_targets.empty())
        throw ConfigError(path.string() + ": chunk_targets must not be empty");
    for (int t : cfg.chunk_targets)
        if (t < 32)
            throw ConfigError(path.string() +
                              ": chunk_targets entries must be at least 32");
    if (cfg.workers < 1)
        throw ConfigError(path.string() + ": workers must be positive");
    if (cfg.extract_retries < 0)
        throw ConfigError(path.string() +
                          ": extract_retries must not be negative");

    if (doc.contains("extractor"))
        cfg.extractor =
            parse_endpoint(doc.at("extractor"), path.string() + ": extractor");
    if (doc.contains("models")) {
        if (!doc.at("models").is_array())
            throw ConfigError(path.string() + ": models must be an array");
        size_t i = 0;
        for (const auto& m : doc.at("models"))
            cfg.models.push_back(parse_endpoint(
                m, path.string() + ": models[" + std::to_string(i++) + "]"));
    }
    if (doc.contains("judges")) {
        if (!doc.at("judges").is_array())
            throw ConfigError(path.string() + ": judges must be an array");
        size_t i = 0;
        for (const auto& j : doc.at("judges"))
            cfg.judges.push_back(parse_endpoint(
                j, path.string() + ": judges[" + std::to_string(i++) + "]"));
    }
    return cfg;
}

std::vector<MachineMeta> load_metadata(const std::filesystem::path& path) {
    json doc = parse_or_throw(detail::read_file(path), path.string());
    if (!doc.is_object() || !doc.contains("machines") ||
        !doc.at("machines").is_array())
        throw ConfigError(path.string() +
                          ": expected an object with a \"machines\" array");

    std::vector<MachineMeta> out;
    size_t i = 0;
    for (const auto& m : doc.at("machines")) {
        std::string what = path.string() + ": machines[" + std::to_string(i++) + "]";
        if (!m.is_object()) throw ConfigError(what + ": must be an object");
        MachineMeta meta;
        try {
            meta.name = m.at("name").get<std::string>();
            meta.difficulty =
                difficulty_from_string(m.at("difficulty").get<std::string>());
            if (m.contains("vulnerability_topics"))
                for (const auto& t : m.at("vulnerability_topics"))
                    meta.vulnerability_topics.push_back(t.get<std::string>());
            meta.file = m.value("file", std::string());
        } catch (const json::exception& e) {
            throw ConfigError(what + ": " + e.what());
        } catch (const SchemaViolation& e) {
            throw ConfigError(what + ": " + e.what());
        }
        if (meta.name.empty())
            throw ConfigError(what + ": name must not be empty");
        out.push_back(std::move(meta));
    }
    return out;
}

WriteupDocument load_writeup(const std::filesystem::path& corpus_dir,
                             const MachineMeta& meta) {
    std::filesystem::path file =
        corpus_dir / (meta.file.empty() ? meta.name + ".md" : meta.file);
    WriteupDocument doc;
    doc.machine_name = meta.name;
    doc.difficulty = meta.difficulty;
    doc.source_path = file.string();
    doc.body = strip_images(detail::read_file(file));
    return doc;
}

}  // namespace farrkit
