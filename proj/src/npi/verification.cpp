#include "npi/verification.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace npi {

namespace {

std::string obs_key(const Observation& o) {
    std::string s;
    s.reserve(o.slots.size() * 2);
    for (uint8_t v : o.slots) {
        s.push_back(static_cast<char>('0' + v / 10));
        s.push_back(static_cast<char>('0' + v % 10));
    }
    return s;
}

std::string out_brief(const TaskSpec& spec, const StepOutput& out) {
    std::ostringstream os;
    os << (out.ret ? "ret=1 " : "ret=0 ") << spec.prog_name(out.next.prog);
    for (int a : out.next.args) os << ' ' << spec.arg_name(a);
    return os.str();
}

int problem_size(const Problem& p) {
    if (const auto* a = std::get_if<AdditionProblem>(&p)) return static_cast<int>(a->a.size());
    if (const auto* arr = std::get_if<ArrayProblem>(&p)) {
        return static_cast<int>(arr->values.size());
    }
    return std::get<DagProblem>(p).n;
}

struct Walker {
    ContextCollection& coll;
    const TaskSpec& spec;
    TaskEnv env;
    std::set<int>* covered;

    void walk(const TraceNode& node) {
        std::string entry = obs_key(observe(env));
        CallContext ctx;
        ctx.prog = node.call.prog;
        ctx.args = node.call.args;
        for (const TraceStep& s : node.steps) {
            ctx.obs.push_back(s.obs);
            ctx.outs.push_back(s.out);
            if (s.child) {
                walk(*s.child);
            } else {
                apply_primitive(env, s.out.next);
            }
        }
        std::string exit = obs_key(observe(env));
        coll.transitions[spec.prog_name(node.call.prog)][entry].insert(exit);

        std::string key = ctx.key();
        auto it = coll.index.find(key);
        int id;
        if (it == coll.index.end()) {
            id = static_cast<int>(coll.contexts.size());
            coll.index.emplace(key, id);
            coll.contexts.push_back(std::move(ctx));
        } else {
            id = it->second;
        }
        if (covered) covered->insert(id);
    }
};

}  // namespace

std::string CallContext::key() const {
    std::string s = std::to_string(prog);
    s.push_back('|');
    for (int a : args) {
        s += std::to_string(a);
        s.push_back(',');
    }
    s.push_back('|');
    for (const Observation& o : obs) {
        s += obs_key(o);
        s.push_back(';');
    }
    return s;
}

void collect_from_problem(ContextCollection& coll, const Problem& problem) {
    TraceNode trace = generate_trace(coll.task, Mode::FullRec, problem, coll.enc);
    std::set<int> covered;
    Walker w{coll, task_spec(coll.task), init_env(coll.task, problem, coll.enc), &covered};
    w.walk(trace);
    coll.candidates.push_back(problem);
    coll.coverage.emplace_back(covered.begin(), covered.end());
}

ContextCollection collect_call_contexts(Task task, Encoder enc,
                                        const std::vector<Problem>& problems) {
    ContextCollection coll;
    coll.task = task;
    coll.enc = enc;
    for (const Problem& p : problems) collect_from_problem(coll, p);
    return coll;
}

ContextCollection collect_until_saturation(Task task, Encoder enc, int max_size, uint64_t seed,
                                           int window, int max_problems) {
    ContextCollection coll;
    coll.task = task;
    coll.enc = enc;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(task), 0x736174ull));
    int stale = 0;
    for (int i = 0; i < max_problems && stale < window; ++i) {
        int size = rng.uniform_int(1, max_size);
        Problem p = random_problem(task, size, rng.next());
        int before = coll.size();
        collect_from_problem(coll, p);
        stale = coll.size() == before ? stale + 1 : 0;
    }
    coll.saturated = stale >= window;
    return coll;
}

std::vector<std::string> contexts_of_problem(Task task, Encoder enc, const Problem& problem) {
    ContextCollection coll;
    coll.task = task;
    coll.enc = enc;
    collect_from_problem(coll, problem);
    std::vector<std::string> keys;
    keys.reserve(coll.contexts.size());
    for (const CallContext& c : coll.contexts) keys.push_back(c.key());
    return keys;
}

VerificationSet build_verification_set(const ContextCollection& coll) {
    VerificationSet v;
    v.task = coll.task;
    v.enc = coll.enc;
    v.contexts = coll.contexts;

    std::vector<char> covered(coll.contexts.size(), 0);
    size_t remaining = coll.contexts.size();
    std::vector<char> used(coll.candidates.size(), 0);
    while (remaining > 0) {
        int best = -1;
        size_t best_gain = 0;
        for (size_t c = 0; c < coll.candidates.size(); ++c) {
            if (used[c]) continue;
            size_t gain = 0;
            for (int id : coll.coverage[c]) gain += !covered[static_cast<size_t>(id)];
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<int>(c);
            }
        }
        if (best < 0) {
            for (size_t id = 0; id < covered.size(); ++id) {
                if (!covered[id]) {
                    throw UncoverableContext("no candidate covers context " +
                                             coll.contexts[id].key());
                }
            }
            break;
        }
        used[static_cast<size_t>(best)] = 1;
        v.problems.push_back(coll.candidates[static_cast<size_t>(best)]);
        for (int id : coll.coverage[static_cast<size_t>(best)]) {
            if (!covered[static_cast<size_t>(id)]) {
                covered[static_cast<size_t>(id)] = 1;
                remaining--;
            }
        }
    }
    return v;
}

std::vector<Problem> enumerate_addition_verification() {
    std::vector<Problem> out;
    // single-digit problems: leading zeros are allowed here
    for (int a = 0; a <= 9; ++a) {
        for (int b = 0; b <= 9; ++b) {
            out.push_back(AdditionProblem{std::to_string(a), std::to_string(b)});
        }
    }
    // every two-digit problem: covers (right column, left column) pairs with
    // carry-in 0, plus every leftmost-digit column against the null column
    for (int a1 = 1; a1 <= 9; ++a1) {
        for (int b1 = 1; b1 <= 9; ++b1) {
            for (int a0 = 0; a0 <= 9; ++a0) {
                for (int b0 = 0; b0 <= 9; ++b0) {
                    out.push_back(AdditionProblem{
                        std::string() + char('0' + a1) + char('0' + a0),
                        std::string() + char('0' + b1) + char('0' + b0)});
                }
            }
        }
    }
    // three-digit problems: middle column under carry-in 1 (forced by 1+9 in
    // the rightmost column) against every digit left column; carry-in 0
    // middles are already induced by the two-digit block
    for (int a2 = 1; a2 <= 9; ++a2) {
        for (int b2 = 1; b2 <= 9; ++b2) {
            for (int a1 = 0; a1 <= 9; ++a1) {
                for (int b1 = 0; b1 <= 9; ++b1) {
                    for (int carry = 0; carry <= 1; ++carry) {
                        const char a0 = carry ? '1' : '0';
                        const char b0 = carry ? '9' : '0';
                        out.push_back(AdditionProblem{
                            std::string() + char('0' + a2) + char('0' + a1) + a0,
                            std::string() + char('0' + b2) + char('0' + b1) + b0});
                    }
                }
            }
        }
    }
    return out;
}

std::string verification_set_to_json(const VerificationSet& v) {
    const TaskSpec& spec = task_spec(v.task);
    nlohmann::json j;
    j["task"] = task_name(v.task);
    j["encoder"] = encoder_name(v.enc);
    auto ctxs = nlohmann::json::array();
    for (const CallContext& c : v.contexts) {
        nlohmann::json cj;
        cj["program"] = spec.prog_name(c.prog);
        cj["args"] = {spec.arg_name(c.args[0]), spec.arg_name(c.args[1]),
                      spec.arg_name(c.args[2])};
        auto obs = nlohmann::json::array();
        for (const Observation& o : c.obs) obs.push_back(o.slots);
        cj["observations"] = obs;
        auto outs = nlohmann::json::array();
        for (const StepOutput& o : c.outs) {
            outs.push_back({{"ret", o.ret ? 1 : 0},
                            {"program", spec.prog_name(o.next.prog)},
                            {"args",
                             {spec.arg_name(o.next.args[0]), spec.arg_name(o.next.args[1]),
                              spec.arg_name(o.next.args[2])}}});
        }
        cj["outputs"] = outs;
        ctxs.push_back(std::move(cj));
    }
    j["contexts"] = ctxs;
    auto probs = nlohmann::json::array();
    for (const Problem& p : v.problems) {
        probs.push_back(nlohmann::json::parse(problem_to_json(p)));
    }
    j["problems"] = probs;
    return j.dump();
}

VerificationSet verification_set_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    VerificationSet v;
    if (!parse_task(j.at("task").get<std::string>(), v.task)) {
        throw std::runtime_error("bad task in verification set");
    }
    if (!parse_encoder(j.at("encoder").get<std::string>(), v.enc)) {
        throw std::runtime_error("bad encoder in verification set");
    }
    const TaskSpec& spec = task_spec(v.task);
    for (const auto& cj : j.at("contexts")) {
        CallContext c;
        c.prog = spec.prog_id(cj.at("program").get<std::string>());
        for (int k = 0; k < kArgSlots; ++k) {
            c.args[k] = spec.arg_id(cj.at("args").at(k).get<std::string>());
        }
        for (const auto& o : cj.at("observations")) {
            Observation ob;
            ob.slots = o.get<std::vector<uint8_t>>();
            c.obs.push_back(std::move(ob));
        }
        for (const auto& o : cj.at("outputs")) {
            StepOutput so;
            so.ret = o.at("ret").get<int>() != 0;
            so.next.prog = spec.prog_id(o.at("program").get<std::string>());
            for (int k = 0; k < kArgSlots; ++k) {
                so.next.args[k] = spec.arg_id(o.at("args").at(k).get<std::string>());
            }
            c.outs.push_back(so);
        }
        v.contexts.push_back(std::move(c));
    }
    for (const auto& pj : j.at("problems")) {
        v.problems.push_back(problem_from_json(v.task, pj.dump()));
    }
    return v;
}

VerifyReport verify_model(const Params<float>& params, const VerificationSet& vset,
                          VerifyMode mode, int jobs) {
    if (params.cfg.task != vset.task) {
        throw std::invalid_argument("checkpoint task does not match verification set");
    }
    if (params.cfg.encoder != vset.enc) {
        throw std::invalid_argument("checkpoint encoder does not match verification set");
    }
    const TaskSpec& spec = task_spec(vset.task);
    VerifyReport rep;
    std::mutex mu;
    jobs = std::max(1, jobs);

    if (mode == VerifyMode::Lockstep || mode == VerifyMode::Both) {
        std::atomic<size_t> next{0};
        std::atomic<bool> pass{true};
        auto worker = [&]() {
            StepOutputs<float> out;
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= vset.contexts.size()) return;
                const CallContext& ctx = vset.contexts[i];
                LstmState<float> st;
                st.zero(params.cfg.hidden);
                for (size_t t = 0; t < ctx.obs.size(); ++t) {
                    std::vector<int> x = encoder_indices(params.cfg, ctx.obs[t], ctx.args);
                    forward_step(params, x, ctx.prog, st, out);
                    StepOutput got;
                    got.ret = out.r >= 0.5f;
                    got.next.prog = decode_argmax_vec(out.prog_logits);
                    for (int k = 0; k < kArgSlots; ++k) {
                        got.next.args[k] = decode_argmax_vec(out.arg_logits[k]);
                    }
                    if (!(got == ctx.outs[t])) {
                        pass.store(false);
                        std::lock_guard<std::mutex> lock(mu);
                        if (static_cast<int>(rep.mismatches.size()) < VerifyReport::kMaxMismatches) {
                            rep.mismatches.push_back(
                                VerifyMismatch{"context " + ctx.key(), static_cast<int>(t),
                                               out_brief(spec, ctx.outs[t]),
                                               out_brief(spec, got)});
                        }
                        break;
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        rep.lockstep_pass = pass.load();
        rep.contexts_checked = static_cast<int>(vset.contexts.size());
    }

    if (mode == VerifyMode::FreeRun || mode == VerifyMode::Both) {
        std::atomic<size_t> next{0};
        std::atomic<bool> pass{true};
        auto worker = [&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= vset.problems.size()) return;
                const Problem& p = vset.problems[i];
                TraceNode oracle = generate_trace(vset.task, Mode::FullRec, p, vset.enc);
                auto want = flatten_trace(oracle);
                InferenceLimits lim = episode_limits(vset.task, problem_size(p), p);
                lim.tail_collapse = false;
                RunResult run = run_inference(params, init_env(vset.task, p, vset.enc),
                                              entry_call(vset.task), lim);
                auto got = flatten_trace(*run.trace);
                std::string diff;
                int at = -1;
                for (size_t t = 0; t < std::min(want.size(), got.size()); ++t) {
                    if (!(want[t].call == got[t].call) || !(want[t].obs == got[t].obs) ||
                        !(want[t].out == got[t].out)) {
                        at = static_cast<int>(t);
                        diff = "step output: want " + out_brief(spec, want[t].out) + ", got " +
                               out_brief(spec, got[t].out);
                        break;
                    }
                }
                if (at < 0 && want.size() != got.size()) {
                    at = static_cast<int>(std::min(want.size(), got.size()));
                    diff = "trace length: want " + std::to_string(want.size()) + ", got " +
                           std::to_string(got.size());
                }
                bool ok = at < 0 && run.status == RunStatus::Ok &&
                          check_result(p, extract_result(run.env));
                if (!ok) {
                    pass.store(false);
                    std::lock_guard<std::mutex> lock(mu);
                    if (static_cast<int>(rep.mismatches.size()) < VerifyReport::kMaxMismatches) {
                        if (diff.empty()) {
                            diff = std::string("episode status ") + run_status_name(run.status);
                        }
                        rep.mismatches.push_back(
                            VerifyMismatch{"problem " + problem_brief(p), at, "exact trace match",
                                           diff});
                    }
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        rep.freerun_pass = pass.load();
        rep.problems_checked = static_cast<int>(vset.problems.size());
    }
    return rep;
}

std::string verify_report_text(const VerifyReport& r, const VerificationSet& vset) {
    std::ostringstream os;
    os << "verification of " << task_name(vset.task) << " (" << encoder_name(vset.enc)
       << " encoder)\n";
    os << "  |V| = " << vset.contexts.size() << ", |S_V| = " << vset.problems.size() << '\n';
    os << "  lockstep: " << (r.lockstep_pass ? "PASS" : "FAIL") << " (" << r.contexts_checked
       << " contexts)\n";
    os << "  freerun:  " << (r.freerun_pass ? "PASS" : "FAIL") << " (" << r.problems_checked
       << " problems)\n";
    for (const VerifyMismatch& m : r.mismatches) {
        os << "  mismatch at " << m.where << " step " << m.step << ": expected " << m.expected
           << "; got " << m.got << '\n';
    }
    os << (r.pass() ? "PASS" : "FAIL") << '\n';
    return os.str();
}

std::string verify_report_json(const VerifyReport& r) {
    nlohmann::json j;
    j["lockstep_pass"] = r.lockstep_pass;
    j["freerun_pass"] = r.freerun_pass;
    j["pass"] = r.pass();
    j["contexts_checked"] = r.contexts_checked;
    j["problems_checked"] = r.problems_checked;
    auto ms = nlohmann::json::array();
    for (const VerifyMismatch& m : r.mismatches) {
        ms.push_back({{"where", m.where}, {"step", m.step}, {"expected", m.expected},
                      {"got", m.got}});
    }
    j["mismatches"] = ms;
    return j.dump(2);
}

}  // namespace npi
