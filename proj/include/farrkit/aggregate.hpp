#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "farrkit/judging.hpp"

namespace farrkit {

struct MachineReport {
    std::string machine;
    Difficulty difficulty = Difficulty::Easy;
    int n_steps = 0;
    int n_failed = 0;
    double outcome_avg = 0;
    double service_avg = 0;
    double vulnerability_avg = 0;
    double machine_avg = 0;  // mean of the three aspect averages
};

struct LeaderboardRow {
    std::string model_id;
    double outcome = 0;
    double service = 0;
    double vulnerability = 0;
    double total_avg = 0;  // mean of the three aspect columns
};

struct DifficultyReport {
    std::string model_id;
    std::optional<double> easy, medium, hard, insane;
    double average = 0;  // unweighted mean of present cells
};

struct CorpusStats {
    int n_machines = 0;
    long n_questions = 0;
    std::map<std::string, int> difficulty_histogram;
    std::map<std::string, int> topic_histogram;
};

// Per-aspect means over judged steps only; throws AllStepsFailed when nothing
// was judged.
MachineReport machine_report(const std::vector<StepEvaluation>& evals,
                             const std::string& machine, Difficulty difficulty);

MachineReport machine_report(const FlowEvaluations& fe);

// Aspect columns are unweighted means over machines.
LeaderboardRow leaderboard_row(const std::string& model_id,
                               const std::vector<MachineReport>& machines);

// One row per model, sorted ascending by total_avg.
std::vector<LeaderboardRow> leaderboard(
    const std::map<std::string, std::vector<MachineReport>>& per_model);

DifficultyReport difficulty_report(const std::string& model_id,
                                   const std::vector<MachineReport>& machines);

std::vector<DifficultyReport> difficulty_table(
    const std::map<std::string, std::vector<MachineReport>>& per_model);

CorpusStats corpus_stats(const std::vector<FarrFlow>& flows);

}  // namespace farrkit
