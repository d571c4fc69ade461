#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "npi/checkpoint.hpp"
#include "npi/evaluation.hpp"
#include "npi/training.hpp"
#include "npi/verification.hpp"

namespace {

using namespace npi;

constexpr int kExitUsage = 1;
constexpr int kExitSoftFail = 2;

struct CommonOpts {
    std::string task = "addition";
    std::string mode = "fullrec";
    std::string encoder = "values";
    uint64_t seed = 0;
    int jobs = 1;
};

void echo_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "config " << cmd;
    for (const auto& [k, v] : kv) std::cout << ' ' << k << '=' << v;
    std::cout << '\n';
}

Task need_task(const std::string& s) {
    Task t;
    if (!parse_task(s, t)) throw CLI::ValidationError("--task", "unknown task: " + s);
    return t;
}

Mode need_mode(const std::string& s) {
    Mode m;
    if (!parse_mode(s, m)) throw CLI::ValidationError("--mode", "unknown mode: " + s);
    return m;
}

Encoder need_encoder(const std::string& s) {
    Encoder e;
    if (!parse_encoder(s, e)) throw CLI::ValidationError("--encoder", "unknown encoder: " + s);
    return e;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << text;
}

int cmd_gen_traces(const CommonOpts& common, const std::string& out_path, bool variant_set,
                   bool single_digit) {
    Task task = need_task(common.task);
    Mode mode = need_mode(common.mode);
    Encoder enc = need_encoder(common.encoder);
    echo_config("gen-traces", {{"task", common.task},
                               {"mode", common.mode},
                               {"encoder", common.encoder},
                               {"seed", std::to_string(common.seed)},
                               {"out", out_path}});
    std::vector<TrainingTrace> set;
    if (single_digit) {
        set = make_single_digit_addition_set(mode);
    } else if (variant_set) {
        set = make_bubble_variant_training_set(mode, common.seed);
    } else {
        set = make_training_set(task, mode, common.seed, enc);
    }
    std::vector<TraceNode*> traces;
    int calls = 0, depth = 0;
    for (auto& t : set) {
        traces.push_back(&t.trace);
        calls += t.trace.count_calls();
        depth = std::max(depth, t.trace.max_depth());
    }
    write_traces_file(out_path, task, traces);
    std::cout << "wrote " << set.size() << " traces (" << calls << " calls, max depth " << depth
              << ") to " << out_path << '\n';
    return 0;
}

int cmd_train(const CommonOpts& common, const std::string& traces_path,
              const std::string& ckpt_path, const std::string& config_path) {
    Task task = need_task(common.task);
    Encoder enc = need_encoder(common.encoder);
    Hyperparams hyper;
    hyper.seed = common.seed;
    if (!config_path.empty()) {
        hyper = hyperparams_from_json(read_file(config_path));
    }
    echo_config("train", {{"task", common.task},
                          {"encoder", common.encoder},
                          {"seed", std::to_string(hyper.seed)},
                          {"traces", traces_path},
                          {"ckpt", ckpt_path},
                          {"lr", std::to_string(hyper.lr)},
                          {"epochs", std::to_string(hyper.max_epochs)}});

    ModelConfig cfg = ModelConfig::for_task(task, enc, hyper.seed);
    auto records = read_traces_file(traces_path, task);
    if (records.empty()) {
        std::cerr << "error: no supervision records in " << traces_path << '\n';
        return kExitUsage;
    }
    auto groups = build_examples(cfg, records);
    Params<float> params = init_params<float>(cfg);
    TrainResult res = train(params, groups, hyper, ckpt_path + ".log.csv", &std::cout);
    save_checkpoint(params, ckpt_path);
    std::cout << "checkpoint " << ckpt_path << " fnv64 " << file_checksum_hex(ckpt_path)
              << " epochs " << res.epochs << (res.converged ? " (converged)" : " (not converged)")
              << '\n';
    return res.converged ? 0 : kExitSoftFail;
}

int cmd_eval(const CommonOpts& common, const std::string& ckpt_path,
             const std::vector<int>& sizes, int trials, const std::string& out_prefix) {
    if (trials < 1) {
        std::cerr << "error: --trials must be >= 1\n";
        return kExitUsage;
    }
    Params<float> params = load_checkpoint(ckpt_path);
    if (!common.task.empty() && need_task(common.task) != params.cfg.task) {
        std::cerr << "error: checkpoint task is " << task_name(params.cfg.task)
                  << " but --task says " << common.task << '\n';
        return kExitUsage;
    }
    echo_config("eval", {{"ckpt", ckpt_path},
                         {"task", task_name(params.cfg.task)},
                         {"trials", std::to_string(trials)},
                         {"seed", std::to_string(common.seed)},
                         {"jobs", std::to_string(common.jobs)}});
    EvalReport rep = evaluate(params, sizes, trials, common.seed, common.jobs);
    rep.checkpoint_id = file_checksum_hex(ckpt_path);
    std::cout << report_markdown(rep);
    if (!out_prefix.empty()) {
        write_file(out_prefix + ".csv", report_csv(rep));
        write_file(out_prefix + ".md", report_markdown(rep));
        std::cout << "wrote " << out_prefix << ".csv and .md\n";
    }
    return 0;
}

VerificationSet build_vset_for(Task task, Encoder enc, uint64_t seed) {
    if (task == Task::Addition) {
        auto problems = enumerate_addition_verification();
        ContextCollection coll = collect_call_contexts(task, enc, problems);
        VerificationSet v;
        v.task = task;
        v.enc = enc;
        v.contexts = coll.contexts;
        v.problems = problems;  // the analytic enumeration is S_V itself
        return v;
    }
    int max_size = task == Task::Toposort ? 8 : 10;
    ContextCollection coll = collect_until_saturation(task, enc, max_size, seed);
    return build_verification_set(coll);
}

int cmd_verify(const CommonOpts& common, const std::string& ckpt_path,
               const std::string& vset_path, const std::string& out_path) {
    Params<float> params = load_checkpoint(ckpt_path);
    Task task = params.cfg.task;
    if (task == Task::Bubble && params.cfg.encoder != Encoder::Comparison) {
        std::cerr << "error: bubble sort is verified only under the comparison encoder; "
                     "this checkpoint was trained with the values encoder\n";
        return kExitUsage;
    }
    echo_config("verify", {{"ckpt", ckpt_path},
                           {"task", task_name(task)},
                           {"encoder", encoder_name(params.cfg.encoder)},
                           {"seed", std::to_string(common.seed)},
                           {"jobs", std::to_string(common.jobs)}});
    VerificationSet vset;
    if (!vset_path.empty() && std::ifstream(vset_path).good()) {
        vset = verification_set_from_json(read_file(vset_path));
        if (vset.task != task || vset.enc != params.cfg.encoder) {
            std::cerr << "error: verification set does not match checkpoint task/encoder\n";
            return kExitUsage;
        }
        std::cout << "loaded verification set from " << vset_path << '\n';
    } else {
        vset = build_vset_for(task, params.cfg.encoder, common.seed);
        if (!vset_path.empty()) {
            write_file(vset_path, verification_set_to_json(vset));
            std::cout << "wrote verification set to " << vset_path << '\n';
        }
    }
    VerifyReport rep = verify_model(params, vset, VerifyMode::Both, common.jobs);
    std::cout << verify_report_text(rep, vset);
    if (!out_path.empty()) {
        write_file(out_path, verify_report_json(rep));
    }
    return rep.pass() ? 0 : kExitSoftFail;
}

int cmd_show_trace(const CommonOpts& common, const std::string& traces_path, int limit) {
    Task task = need_task(common.task);
    const TaskSpec& spec = task_spec(task);
    auto records = read_traces_file(traces_path, task);
    int shown = 0;
    int last_trace = -1;
    for (const FlatRecord& r : records) {
        if (limit >= 0 && shown >= limit) break;
        if (r.trace_id != last_trace) {
            last_trace = r.trace_id;
            std::cout << "trace " << r.trace_id << ":\n";
            std::cout << "  " << spec.prog_name(r.call.prog) << '\n';
            shown++;
        }
        std::cout << std::string(static_cast<size_t>(r.depth) * 2 + 4, ' ');
        std::cout << spec.prog_name(r.out.next.prog);
        for (int a : r.out.next.args) {
            if (a != 0) std::cout << ' ' << spec.arg_name(a);
        }
        if (r.out.ret) std::cout << "  .";
        std::cout << '\n';
        shown++;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recursive neural programmer-interpreter pipeline"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string traces_path, ckpt_path, out_path, config_path, vset_path;
    std::vector<int> sizes;
    int trials = 30;
    int limit = -1;
    bool variant_set = false, single_digit = false;

    auto add_common = [&](CLI::App* cmd, bool with_mode) {
        cmd->add_option("--task", common.task, "addition|bubble|toposort|quicksort");
        if (with_mode) cmd->add_option("--mode", common.mode, "nonrec|partial|fullrec");
        cmd->add_option("--encoder", common.encoder, "values|comparison");
        cmd->add_option("--seed", common.seed, "random seed");
        cmd->add_option("--jobs", common.jobs, "worker threads");
    };

    auto* gen = app.add_subcommand("gen-traces", "generate golden traces (JSONL)");
    add_common(gen, true);
    gen->add_option("--out", out_path, "output JSONL path")->required();
    gen->add_flag("--bubble-variant-set", variant_set,
                  "use the comparison-encoder bubble training set (2x len 7, 1x len 6)");
    gen->add_flag("--single-digit-set", single_digit,
                  "use the five single-digit addition sums");

    auto* tr = app.add_subcommand("train", "train a model on a trace file");
    add_common(tr, false);
    tr->add_option("--traces", traces_path, "JSONL trace file")->required();
    tr->add_option("--ckpt", ckpt_path, "checkpoint output path")->required();
    tr->add_option("--config", config_path, "hyperparameter JSON file");

    auto* ev = app.add_subcommand("eval", "accuracy on random problems per size");
    add_common(ev, false);
    ev->add_option("--ckpt", ckpt_path, "checkpoint path")->required();
    ev->add_option("--sizes", sizes, "problem sizes")->required()->delimiter(',');
    ev->add_option("--trials", trials, "episodes per size");
    ev->add_option("--out", out_path, "report path prefix (.csv/.md)");

    auto* ve = app.add_subcommand("verify", "step-exact verification against the reference");
    add_common(ve, false);
    ve->add_option("--ckpt", ckpt_path, "checkpoint path")->required();
    ve->add_option("--vset", vset_path, "verification set cache (JSON, created if missing)");
    ve->add_option("--out", out_path, "report JSON path");

    auto* sh = app.add_subcommand("show-trace", "pretty-print a JSONL trace file");
    add_common(sh, false);
    sh->add_option("--traces", traces_path, "JSONL trace file")->required();
    sh->add_option("--limit", limit, "max lines (-1 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_traces(common, out_path, variant_set, single_digit);
        if (tr->parsed()) return cmd_train(common, traces_path, ckpt_path, config_path);
        if (ev->parsed()) return cmd_eval(common, ckpt_path, sizes, trials, out_path);
        if (ve->parsed()) return cmd_verify(common, ckpt_path, vset_path, out_path);
        if (sh->parsed()) return cmd_show_trace(common, traces_path, limit);
    } catch (const UnsupportedMode& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const CLI::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
