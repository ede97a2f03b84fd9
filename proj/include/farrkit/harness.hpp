#pragma once

#include <string>
#include <vector>

#include "farrkit/farr.hpp"
#include "farrkit/llmclient.hpp"

namespace farrkit {

// Accumulated "all_findings" hint string; grows by appending only.
struct HintState {
    std::string accumulated;
};

struct StepQuestion {
    int step_index = 0;
    std::string prompt;
};

struct StepAnswer {
    int step_index = 0;
    std::string model_answer;
    std::string model_id;
    bool failed = false;
    std::string error;
};

// Version tag for the frozen separators below; recorded in the run manifest.
inline constexpr const char* kHintContractVersion = "hints-v1";

StepQuestion formulate_question(const HintState& state, int step_index,
                                const std::string& current_findings);

HintState advance_hints(const HintState& state, const std::string& findings,
                        const std::string& result);

// One answer per step, strictly in order. Hints advance after every step
// regardless of the answer; endpoint/protocol failures are recorded as failed
// answers and the flow continues. AuthError and CacheMiss propagate.
std::vector<StepAnswer> evaluate_flow(const FarrFlow& flow, ChatClient& client);

struct FlowAnswers {
    std::string machine;
    Difficulty difficulty = Difficulty::Easy;
    std::string model_id;
    std::vector<StepAnswer> answers;
};

// Parallel over flows (bounded by workers), sequential within each flow.
std::vector<FlowAnswers> evaluate_corpus(const std::vector<FarrFlow>& flows,
                                         ChatClient& client, int workers);

}  // namespace farrkit
