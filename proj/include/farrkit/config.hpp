#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "farrkit/corpus.hpp"
#include "farrkit/llmclient.hpp"

namespace farrkit {

struct MachineMeta {
    std::string name;
    Difficulty difficulty = Difficulty::Easy;
    std::vector<std::string> vulnerability_topics;
    std::string file;  // write-up file name; defaults to <name>.md
};

struct RunConfig {
    std::string corpus_dir;
    std::string metadata_file;
    std::string out_dir = "out";
    std::vector<int> chunk_targets = {500, 1000, 2000};
    std::optional<EndpointConfig> extractor;
    std::vector<EndpointConfig> models;
    std::vector<EndpointConfig> judges;
    std::string cache_dir;  // defaults to <out_dir>/cache
    CacheMode mode = CacheMode::Record;
    int workers = 4;
    int extract_retries = 2;  // re-asks after a malformed extraction/convgen reply
};

// JSON config document; API keys enter only as environment variable names.
// Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<MachineMeta> load_metadata(const std::filesystem::path& path);

// Reads the write-up file and strips image syntax (alt text kept).
WriteupDocument load_writeup(const std::filesystem::path& corpus_dir,
                             const MachineMeta& meta);

}  // namespace farrkit
