#include "npi/evaluation.hpp"

#include <atomic>
#include <sstream>
#include <thread>

namespace npi {

Problem gen_problem(Task task, int size, uint64_t seed) {
    if (size < 1) throw RejectedInput("problem size must be >= 1");
    return random_problem(task, size, seed);
}

long oracle_step_count(Task task, const Problem& problem) {
    TraceNode t = generate_trace(task, Mode::FullRec, problem);
    return static_cast<long>(flatten_trace(t).size());
}

InferenceLimits episode_limits(Task task, int size, const Problem& problem) {
    InferenceLimits lim = InferenceLimits::for_size(size);
    long oracle = oracle_step_count(task, problem);
    lim.max_total_steps = 4 * oracle + 1000;
    return lim;
}

EpisodeOutcome run_episode(const Params<float>& params, const Problem& problem,
                           const InferenceLimits& limits, Encoder enc) {
    EpisodeOutcome out;
    TaskEnv env = init_env(params.cfg.task, problem, enc);
    RunResult run = run_inference(params, std::move(env), entry_call(params.cfg.task), limits);
    out.status = run.status;
    out.steps = run.total_steps;
    out.success =
        run.status == RunStatus::Ok && check_result(problem, extract_result(run.env));
    return out;
}

EvalReport evaluate(const Params<float>& params, const std::vector<int>& sizes, int trials,
                    uint64_t seed, int jobs) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    EvalReport rep;
    rep.task = params.cfg.task;
    rep.encoder = params.cfg.encoder;
    rep.seed = seed;
    jobs = std::max(1, jobs);
    for (int size : sizes) {
        EvalRow row;
        row.size = size;
        row.trials = trials;
        std::atomic<int> next{0}, successes{0}, budget{0};
        auto worker = [&]() {
            for (;;) {
                int trial = next.fetch_add(1);
                if (trial >= trials) return;
                uint64_t pseed = mix_seed(seed, static_cast<uint64_t>(size),
                                          static_cast<uint64_t>(trial));
                Problem p = gen_problem(params.cfg.task, size, pseed);
                InferenceLimits lim = episode_limits(params.cfg.task, size, p);
                EpisodeOutcome ep = run_episode(params, p, lim, params.cfg.encoder);
                if (ep.success) successes.fetch_add(1);
                if (ep.status == RunStatus::StepBudget || ep.status == RunStatus::DepthBudget ||
                    ep.status == RunStatus::CallStepBudget) {
                    budget.fetch_add(1);
                }
            }
        };
        if (jobs == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        row.successes = successes.load();
        row.budget_failures = budget.load();
        row.accuracy = static_cast<double>(row.successes) / row.trials;
        rep.rows.push_back(row);
    }
    return rep;
}

std::string report_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "task,encoder,checkpoint,seed,size,trials,successes,budget_failures,accuracy\n";
    for (const EvalRow& row : r.rows) {
        os << task_name(r.task) << ',' << encoder_name(r.encoder) << ',' << r.checkpoint_id
           << ',' << r.seed << ',' << row.size << ',' << row.trials << ',' << row.successes
           << ',' << row.budget_failures << ',' << row.accuracy << '\n';
    }
    return os.str();
}

std::string report_markdown(const EvalReport& r) {
    std::ostringstream os;
    const char* size_label = r.task == Task::Toposort ? "Number of Vertices"
                             : r.task == Task::Addition ? "Number of Digits"
                                                        : "Length of Array";
    os << "| " << size_label << " | Accuracy |\n|---|---|\n";
    for (const EvalRow& row : r.rows) {
        double pct = 100.0 * row.accuracy;
        os << "| " << row.size << " | ";
        std::ostringstream v;
        v.precision(3);
        v << pct;
        os << v.str() << "% |\n";
    }
    return os.str();
}

}  // namespace npi
