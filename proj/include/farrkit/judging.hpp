#pragma once

#include <optional>
#include <string>
#include <vector>

#include "farrkit/farr.hpp"
#include "farrkit/harness.hpp"
#include "farrkit/llmclient.hpp"

namespace farrkit {

inline constexpr const char* kJudgeTemplateVersion = "judge-v1";

struct AspectScores {
    int outcome = 0;
    int service = 0;
    int vulnerability = 0;

    bool operator==(const AspectScores&) const = default;
};

struct AspectPercents {
    double outcome = 0;
    double service = 0;
    double vulnerability = 0;
};

struct StepEvaluation {
    int step_index = 0;
    StepAnswer answer;
    std::optional<AspectScores> scores;  // nullopt = failed
    std::string failure_reason;
    std::string judge_id;

    bool failed() const { return !scores.has_value(); }
};

std::vector<ChatMessage> build_judge_prompt(const FarrStep& reference,
                                            const std::string& candidate);

// First JSON object carrying the three integer keys, fences/prose tolerated.
// Throws MalformedVerdict / RangeViolation.
AspectScores parse_judge_scores(const std::string& text);

// Canonical JSON form, e.g. {"outcome":2,"service":3,"vulnerability":1}.
std::string render_scores(const AspectScores& s);

AspectPercents score_percent(const AspectScores& s);

// Judges one answer; malformed or out-of-range verdicts get up to two re-asks
// with a format reminder before the step is marked failed. Failed model
// answers are passed through as failed evaluations without a judge call.
StepEvaluation judge_step(const FarrStep& reference, const StepAnswer& answer,
                          ChatClient& judge);

struct FlowEvaluations {
    std::string machine;
    Difficulty difficulty = Difficulty::Easy;
    std::string model_id;
    std::string judge_id;
    std::vector<StepEvaluation> evaluations;
};

// Steps are judged independently; parallel under the worker budget.
FlowEvaluations judge_flow(const FarrFlow& flow, const FlowAnswers& answers,
                           ChatClient& judge, int workers);

}  // namespace farrkit
