#include "farrkit/aggregate.hpp"

#include <algorithm>
#include <set>

namespace farrkit {

namespace {

double mean(const std::vector<double>& xs) {
    double sum = 0;
    for (double x : xs) sum += x;
    return sum / (double)xs.size();
}

}  // namespace

MachineReport machine_report(const std::vector<StepEvaluation>& evals,
                             const std::string& machine, Difficulty difficulty) {
    MachineReport r;
    r.machine = machine;
    r.difficulty = difficulty;
    r.n_steps = (int)evals.size();
    double outcome = 0, service = 0, vulnerability = 0;
    int judged = 0;
    for (const auto& e : evals) {
        if (e.failed()) {
            ++r.n_failed;
            continue;
        }
        AspectPercents p = score_percent(*e.scores);
        outcome += p.outcome;
        service += p.service;
        vulnerability += p.vulnerability;
        ++judged;
    }
    if (judged == 0)
        throw AllStepsFailed("no judged steps for machine " + machine);
    r.outcome_avg = outcome / judged;
    r.service_avg = service / judged;
    r.vulnerability_avg = vulnerability / judged;
    r.machine_avg = (r.outcome_avg + r.service_avg + r.vulnerability_avg) / 3.0;
    return r;
}

MachineReport machine_report(const FlowEvaluations& fe) {
    return machine_report(fe.evaluations, fe.machine, fe.difficulty);
}

LeaderboardRow leaderboard_row(const std::string& model_id,
                               const std::vector<MachineReport>& machines) {
    if (machines.empty())
        throw FarrkitError("leaderboard row for " + model_id +
                           " needs at least one machine");
    LeaderboardRow row;
    row.model_id = model_id;
    for (const auto& m : machines) {
        row.outcome += m.outcome_avg;
        row.service += m.service_avg;
        row.vulnerability += m.vulnerability_avg;
    }
    double n = (double)machines.size();
    row.outcome /= n;
    row.service /= n;
    row.vulnerability /= n;
    row.total_avg = (row.outcome + row.service + row.vulnerability) / 3.0;
    return row;
}

std::vector<LeaderboardRow> leaderboard(
    const std::map<std::string, std::vector<MachineReport>>& per_model) {
    std::vector<LeaderboardRow> rows;
    rows.reserve(per_model.size());
    for (const auto& [model_id, machines] : per_model)
        rows.push_back(leaderboard_row(model_id, machines));
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.total_avg != b.total_avg ? a.total_avg < b.total_avg
                                          : a.model_id < b.model_id;
    });
    return rows;
}

DifficultyReport difficulty_report(const std::string& model_id,
                                   const std::vector<MachineReport>& machines) {
    if (machines.empty())
        throw FarrkitError("difficulty report for " + model_id +
                           " needs at least one machine");
    std::vector<double> cells[4];
    for (const auto& m : machines)
        cells[(int)m.difficulty].push_back(m.machine_avg);

    DifficultyReport rep;
    rep.model_id = model_id;
    std::optional<double>* slots[4] = {&rep.easy, &rep.medium, &rep.hard,
                                       &rep.insane};
    std::vector<double> present;
    for (int d = 0; d < 4; ++d) {
        if (cells[d].empty()) continue;
        *slots[d] = mean(cells[d]);
        present.push_back(**slots[d]);
    }
    rep.average = mean(present);  // unweighted mean of present cells
    return rep;
}

std::vector<DifficultyReport> difficulty_table(
    const std::map<std::string, std::vector<MachineReport>>& per_model) {
    std::vector<DifficultyReport> reps;
    reps.reserve(per_model.size());
    for (const auto& [model_id, machines] : per_model)
        reps.push_back(difficulty_report(model_id, machines));
    std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) {
        return a.average != b.average ? a.average < b.average
                                      : a.model_id < b.model_id;
    });
    return reps;
}

CorpusStats corpus_stats(const std::vector<FarrFlow>& flows) {
    CorpusStats stats;
    std::set<std::string> machines;
    for (const auto& f : flows) {
        machines.insert(f.machine);
        stats.n_questions += (long)f.steps.size();
        ++stats.difficulty_histogram[to_string(f.difficulty)];
        for (const auto& t : f.vulnerability_topics)
            ++stats.topic_histogram[t];
    }
    stats.n_machines = (int)machines.size();
    return stats;
}

}  // namespace farrkit
