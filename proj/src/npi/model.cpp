#include "npi/model.hpp"

#include <cmath>

namespace npi {

int ModelConfig::obs_width() const {
    int w = 0;
    for (int a : task_spec(task).obs_arity(encoder)) w += a;
    return w;
}

int ModelConfig::arg_vocab() const { return task_spec(task).arg_vocab_size(); }
int ModelConfig::programs() const { return task_spec(task).program_count(); }

ModelConfig ModelConfig::for_task(Task task, Encoder enc, uint64_t seed) {
    ModelConfig cfg;
    cfg.task = task;
    cfg.encoder = enc;
    cfg.seed = seed;
    return cfg;
}

template <class S>
void Params<S>::allocate() {
    const int H = cfg.hidden, SD = cfg.s_dim, E = cfg.emb_dim, K = cfg.key_dim;
    const int X = cfg.input_width(), P = cfg.programs(), V = cfg.arg_vocab();
    enc_W = Mat<S>::Zero(SD, X);
    enc_b = Mat<S>::Zero(SD, 1);
    emb = Mat<S>::Zero(P, E);
    key = Mat<S>::Zero(P, K);
    l1_W = Mat<S>::Zero(4 * H, SD + E + H);
    l1_b = Mat<S>::Zero(4 * H, 1);
    l2_W = Mat<S>::Zero(4 * H, H + H);
    l2_b = Mat<S>::Zero(4 * H, 1);
    end_W = Mat<S>::Zero(1, H);
    end_b = Mat<S>::Zero(1, 1);
    dec_W = Mat<S>::Zero(K, H);
    dec_b = Mat<S>::Zero(K, 1);
    for (int k = 0; k < kArgSlots; ++k) {
        arg_W[k] = Mat<S>::Zero(V, H);
        arg_b[k] = Mat<S>::Zero(V, 1);
    }
}

template <class S>
void Params<S>::set_zero() {
    for_each([](const char*, Mat<S>& m) { m.setZero(); });
}

template <class S>
bool Params<S>::all_finite() const {
    bool ok = true;
    for_each([&](const char*, const Mat<S>& m) { ok = ok && m.allFinite(); });
    return ok;
}

template <class S>
std::vector<Mat<S>*> Params<S>::tensors() {
    std::vector<Mat<S>*> out;
    for_each([&](const char*, Mat<S>& m) { out.push_back(&m); });
    return out;
}

template <class S>
std::vector<const Mat<S>*> Params<S>::tensors_const() const {
    std::vector<const Mat<S>*> out;
    for_each([&](const char*, const Mat<S>& m) { out.push_back(&m); });
    return out;
}

template <class S>
Params<S> init_params(const ModelConfig& cfg) {
    Params<S> P;
    P.cfg = cfg;
    P.allocate();
    Rng rng(mix_seed(cfg.seed, 0x696e6974ull));
    P.for_each([&](const char*, Mat<S>& m) {
        S* d = m.data();
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            d[i] = static_cast<S>(rng.uniform(-0.08, 0.08));
        }
    });
    // forget-gate bias starts at +1 (gate order i, f, g, o)
    const int H = cfg.hidden;
    P.l1_b.block(H, 0, H, 1).array() += S(1);
    P.l2_b.block(H, 0, H, 1).array() += S(1);
    return P;
}

std::vector<int> encoder_indices(const ModelConfig& cfg, const Observation& obs,
                                 const std::array<int, kArgSlots>& args) {
    const auto arity = task_spec(cfg.task).obs_arity(cfg.encoder);
    if (obs.slots.size() != arity.size()) {
        throw std::invalid_argument("observation arity mismatch");
    }
    std::vector<int> idx;
    idx.reserve(arity.size() + kArgSlots);
    int off = 0;
    for (size_t i = 0; i < arity.size(); ++i) {
        if (obs.slots[i] >= arity[i]) throw std::invalid_argument("slot value out of range");
        idx.push_back(off + obs.slots[i]);
        off += arity[i];
    }
    const int V = cfg.arg_vocab();
    for (int k = 0; k < kArgSlots; ++k) {
        idx.push_back(off + k * V + args[k]);
    }
    return idx;
}

namespace {

template <class S>
inline S sigmoid(S x) {
    return x >= 0 ? S(1) / (S(1) + std::exp(-x)) : std::exp(x) / (S(1) + std::exp(x));
}

template <class S>
struct GateSplit {
    Vec<S> i, f, g, o;
};

template <class S>
GateSplit<S> apply_gates(Vec<S>& pre, int H) {
    GateSplit<S> g;
    g.i = pre.segment(0, H).unaryExpr([](S x) { return sigmoid(x); });
    g.f = pre.segment(H, H).unaryExpr([](S x) { return sigmoid(x); });
    g.g = pre.segment(2 * H, H).array().tanh();
    g.o = pre.segment(3 * H, H).unaryExpr([](S x) { return sigmoid(x); });
    return g;
}

}  // namespace

template <class S>
void forward_step(const Params<S>& P, const std::vector<int>& x_idx, int prog,
                  LstmState<S>& st, StepOutputs<S>& out, StepCache<S>* cache) {
    const int H = P.cfg.hidden, SD = P.cfg.s_dim, E = P.cfg.emb_dim;

    Vec<S> s_pre = P.enc_b.col(0);
    for (int idx : x_idx) s_pre += P.enc_W.col(idx);
    Vec<S> s = s_pre.cwiseMax(S(0));

    Vec<S> u1(SD + E);
    u1.head(SD) = s;
    u1.tail(E) = P.emb.row(prog).transpose();

    Vec<S> pre1 = P.l1_b.col(0);
    pre1.noalias() += P.l1_W.leftCols(SD + E) * u1;
    pre1.noalias() += P.l1_W.rightCols(H) * st.h1;
    GateSplit<S> g1 = apply_gates(pre1, H);
    Vec<S> c1 = g1.f.cwiseProduct(st.c1) + g1.i.cwiseProduct(g1.g);
    Vec<S> tc1 = c1.array().tanh();
    Vec<S> h1 = g1.o.cwiseProduct(tc1);

    Vec<S> pre2 = P.l2_b.col(0);
    pre2.noalias() += P.l2_W.leftCols(H) * h1;
    pre2.noalias() += P.l2_W.rightCols(H) * st.h2;
    GateSplit<S> g2 = apply_gates(pre2, H);
    Vec<S> c2 = g2.f.cwiseProduct(st.c2) + g2.i.cwiseProduct(g2.g);
    Vec<S> tc2 = c2.array().tanh();
    Vec<S> h2 = g2.o.cwiseProduct(tc2);

    S r_pre = (P.end_W * h2)(0, 0) + P.end_b(0, 0);
    out.r = sigmoid(r_pre);
    Vec<S> q = P.dec_b.col(0);
    q.noalias() += P.dec_W * h2;
    out.prog_logits.noalias() = P.key * q;
    for (int k = 0; k < kArgSlots; ++k) {
        out.arg_logits[k] = P.arg_b[k].col(0);
        out.arg_logits[k].noalias() += P.arg_W[k] * h2;
    }

    if (cache) {
        cache->x_idx = x_idx;
        cache->prog = prog;
        cache->h1_prev = st.h1;
        cache->c1_prev = st.c1;
        cache->h2_prev = st.h2;
        cache->c2_prev = st.c2;
        cache->s_pre = s_pre;
        cache->s = s;
        cache->u1 = u1;
        cache->i1 = g1.i; cache->f1 = g1.f; cache->g1 = g1.g; cache->o1 = g1.o;
        cache->c1 = c1; cache->tc1 = tc1; cache->h1 = h1;
        cache->i2 = g2.i; cache->f2 = g2.f; cache->g2 = g2.g; cache->o2 = g2.o;
        cache->c2 = c2; cache->tc2 = tc2; cache->h2 = h2;
        cache->r_pre = r_pre;
        cache->r = out.r;
        cache->q = q;
        cache->prog_logits = out.prog_logits;
        cache->arg_logits = out.arg_logits;
    }

    st.h1 = std::move(h1);
    st.c1 = std::move(c1);
    st.h2 = std::move(h2);
    st.c2 = std::move(c2);
}

int decode_argmax(const float* data, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
        if (data[i] > data[best]) best = i;
    }
    return best;
}

namespace {

template <class S>
S cross_entropy(const Vec<S>& logits, int target, Vec<S>* dlogits) {
    S m = logits.maxCoeff();
    Vec<S> ex = (logits.array() - m).exp();
    S z = ex.sum();
    if (dlogits) *dlogits = ex / z;
    S lse = std::log(z) + m;
    return lse - logits(target);
}

template <class S>
S softplus(S x) {
    return std::max(x, S(0)) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

template <class S>
GroupStats<S> group_pass(const Params<S>& P, const Group& g, Params<S>* grads) {
    const int H = P.cfg.hidden, SD = P.cfg.s_dim, E = P.cfg.emb_dim;
    const int T = static_cast<int>(g.steps.size());
    GroupStats<S> stats;
    stats.steps = T;
    if (T == 0) return stats;
    const S inv_t = S(1) / S(T);

    LstmState<S> st;
    st.zero(H);
    std::vector<StepCache<S>> caches(static_cast<size_t>(T));
    StepOutputs<S> out;
    S loss = 0;
    for (int t = 0; t < T; ++t) {
        const GroupStep& step = g.steps[t];
        forward_step(P, step.x_idx, g.prog, st, out, &caches[t]);
        const StepCache<S>& C = caches[t];
        S y = step.ret ? S(1) : S(0);
        loss += softplus(C.r_pre) - y * C.r_pre;
        loss += cross_entropy<S>(C.prog_logits, step.out_prog, nullptr);
        for (int k = 0; k < kArgSlots; ++k) {
            loss += cross_entropy<S>(C.arg_logits[k], step.out_args[k], nullptr);
        }
        bool ok = (C.r >= S(0.5)) == step.ret &&
                  decode_argmax_vec(C.prog_logits) == step.out_prog;
        for (int k = 0; ok && k < kArgSlots; ++k) {
            ok = decode_argmax_vec(C.arg_logits[k]) == step.out_args[k];
        }
        if (ok) stats.correct++;
    }
    stats.loss = loss * inv_t;
    if (!grads) return stats;

    Params<S>& G = *grads;
    Vec<S> dh1n = Vec<S>::Zero(H), dc1n = Vec<S>::Zero(H);
    Vec<S> dh2n = Vec<S>::Zero(H), dc2n = Vec<S>::Zero(H);
    for (int t = T - 1; t >= 0; --t) {
        const GroupStep& step = g.steps[t];
        const StepCache<S>& C = caches[t];

        // decoder heads
        S drpre = (C.r - (step.ret ? S(1) : S(0))) * inv_t;
        Vec<S> dplog;
        cross_entropy<S>(C.prog_logits, step.out_prog, &dplog);
        dplog(step.out_prog) -= S(1);
        dplog *= inv_t;
        Vec<S> dq = P.key.transpose() * dplog;
        G.key.noalias() += dplog * C.q.transpose();
        G.dec_W.noalias() += dq * C.h2.transpose();
        G.dec_b.col(0) += dq;
        G.end_W.row(0) += drpre * C.h2.transpose();
        G.end_b(0, 0) += drpre;

        Vec<S> dh2 = P.end_W.row(0).transpose() * drpre;
        dh2.noalias() += P.dec_W.transpose() * dq;
        for (int k = 0; k < kArgSlots; ++k) {
            Vec<S> da;
            cross_entropy<S>(C.arg_logits[k], step.out_args[k], &da);
            da(step.out_args[k]) -= S(1);
            da *= inv_t;
            G.arg_W[k].noalias() += da * C.h2.transpose();
            G.arg_b[k].col(0) += da;
            dh2.noalias() += P.arg_W[k].transpose() * da;
        }
        dh2 += dh2n;

        // layer 2
        Vec<S> do2 = dh2.cwiseProduct(C.tc2);
        Vec<S> dc2 = dc2n + dh2.cwiseProduct(C.o2)
                                .cwiseProduct((S(1) - C.tc2.array().square()).matrix());
        Vec<S> dpre2(4 * H);
        dpre2.segment(0, H) = dc2.cwiseProduct(C.g2)
                                  .cwiseProduct(C.i2)
                                  .cwiseProduct((S(1) - C.i2.array()).matrix());
        dpre2.segment(H, H) = dc2.cwiseProduct(C.c2_prev)
                                  .cwiseProduct(C.f2)
                                  .cwiseProduct((S(1) - C.f2.array()).matrix());
        dpre2.segment(2 * H, H) =
            dc2.cwiseProduct(C.i2).cwiseProduct((S(1) - C.g2.array().square()).matrix());
        dpre2.segment(3 * H, H) =
            do2.cwiseProduct(C.o2).cwiseProduct((S(1) - C.o2.array()).matrix());
        G.l2_W.leftCols(H).noalias() += dpre2 * C.h1.transpose();
        G.l2_W.rightCols(H).noalias() += dpre2 * C.h2_prev.transpose();
        G.l2_b.col(0) += dpre2;
        Vec<S> dh1 = P.l2_W.leftCols(H).transpose() * dpre2;
        dh2n.noalias() = P.l2_W.rightCols(H).transpose() * dpre2;
        dc2n = dc2.cwiseProduct(C.f2);

        // layer 1
        dh1 += dh1n;
        Vec<S> do1 = dh1.cwiseProduct(C.tc1);
        Vec<S> dc1 = dc1n + dh1.cwiseProduct(C.o1)
                                .cwiseProduct((S(1) - C.tc1.array().square()).matrix());
        Vec<S> dpre1(4 * H);
        dpre1.segment(0, H) = dc1.cwiseProduct(C.g1)
                                  .cwiseProduct(C.i1)
                                  .cwiseProduct((S(1) - C.i1.array()).matrix());
        dpre1.segment(H, H) = dc1.cwiseProduct(C.c1_prev)
                                  .cwiseProduct(C.f1)
                                  .cwiseProduct((S(1) - C.f1.array()).matrix());
        dpre1.segment(2 * H, H) =
            dc1.cwiseProduct(C.i1).cwiseProduct((S(1) - C.g1.array().square()).matrix());
        dpre1.segment(3 * H, H) =
            do1.cwiseProduct(C.o1).cwiseProduct((S(1) - C.o1.array()).matrix());
        G.l1_W.leftCols(SD + E).noalias() += dpre1 * C.u1.transpose();
        G.l1_W.rightCols(H).noalias() += dpre1 * C.h1_prev.transpose();
        G.l1_b.col(0) += dpre1;
        Vec<S> du1 = P.l1_W.leftCols(SD + E).transpose() * dpre1;
        dh1n.noalias() = P.l1_W.rightCols(H).transpose() * dpre1;
        dc1n = dc1.cwiseProduct(C.f1);

        // encoder and program embedding
        G.emb.row(C.prog) += du1.tail(E).transpose();
        Vec<S> ds = du1.head(SD);
        Vec<S> ds_pre =
            ds.cwiseProduct((C.s_pre.array() > S(0)).template cast<S>().matrix());
        G.enc_b.col(0) += ds_pre;
        for (int idx : C.x_idx) G.enc_W.col(idx) += ds_pre;
    }
    return stats;
}

InferenceLimits InferenceLimits::for_size(int problem_size) {
    InferenceLimits lim;
    lim.max_depth = 4 * problem_size + 16;
    return lim;
}

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "ok";
        case RunStatus::StepBudget: return "step-budget-exhausted";
        case RunStatus::CallStepBudget: return "call-step-budget-exhausted";
        case RunStatus::DepthBudget: return "depth-budget-exhausted";
        case RunStatus::InvalidAction: return "invalid-action";
    }
    return "?";
}

namespace {

struct FrameRt {
    ProgramCall call;
    LstmState<float> state;
    TraceNode* node = nullptr;
    const TraceNode* teacher = nullptr;
    int steps = 0;
    bool pending_return = false;
};

void pop_cascade(std::vector<FrameRt>& stack) {
    stack.pop_back();
    while (!stack.empty() && stack.back().pending_return) stack.pop_back();
}

}  // namespace

RunResult run_inference(const Params<float>& P, TaskEnv env, ProgramCall call,
                        const InferenceLimits& limits, const TraceNode* teacher) {
    const TaskSpec& spec = task_spec(P.cfg.task);
    const int H = P.cfg.hidden;
    RunResult res;
    res.trace = std::make_unique<TraceNode>();
    res.trace->call = call;

    std::vector<FrameRt> stack;
    stack.push_back(FrameRt{call, {}, res.trace.get(), teacher, 0, false});
    stack.back().state.zero(H);
    res.peak_depth = 1;

    StepOutputs<float> out;
    while (!stack.empty()) {
        FrameRt& f = stack.back();
        if (res.total_steps + 1 > limits.max_total_steps) {
            res.status = RunStatus::StepBudget;
            break;
        }
        if (f.steps + 1 > limits.max_steps_per_call) {
            res.status = RunStatus::CallStepBudget;
            break;
        }
        res.total_steps++;
        f.steps++;

        Observation obs = observe(env);
        std::vector<int> x = encoder_indices(P.cfg, obs, f.call.args);
        forward_step(P, x, f.call.prog, f.state, out);

        bool ret;
        ProgramCall next;
        if (f.teacher) {
            const TraceStep& ts = f.teacher->steps.at(static_cast<size_t>(f.steps) - 1);
            ret = ts.out.ret;
            next = ts.out.next;
        } else {
            ret = out.r >= static_cast<float>(limits.alpha);
            next.prog = decode_argmax_vec(out.prog_logits);
            for (int k = 0; k < kArgSlots; ++k) {
                next.args[k] = decode_argmax_vec(out.arg_logits[k]);
            }
        }

        f.node->steps.push_back(TraceStep{obs, StepOutput{ret, next}, nullptr});
        TraceStep& rec = f.node->steps.back();

        if (spec.is_primitive(next.prog)) {
            if (!spec.valid_primitive_args(next)) {
                res.status = RunStatus::InvalidAction;
                break;
            }
            apply_primitive(env, next);
            if (ret) pop_cascade(stack);
        } else {
            rec.child = std::make_unique<TraceNode>();
            rec.child->call = next;
            const TraceNode* child_teacher = nullptr;
            if (f.teacher) {
                child_teacher = f.teacher->steps[static_cast<size_t>(f.steps) - 1].child.get();
            }
            if (ret && limits.tail_collapse && next.prog == f.call.prog) {
                // tail self-call: replace the frame instead of stacking
                f.call = next;
                f.state.zero(H);
                f.steps = 0;
                f.node = rec.child.get();
                f.teacher = child_teacher;
            } else {
                if (static_cast<int>(stack.size()) + 1 > limits.max_depth) {
                    res.status = RunStatus::DepthBudget;
                    break;
                }
                if (ret) f.pending_return = true;
                FrameRt child{next, {}, rec.child.get(), child_teacher, 0, false};
                child.state.zero(H);
                stack.push_back(std::move(child));
                res.peak_depth = std::max(res.peak_depth, static_cast<int>(stack.size()));
            }
        }
    }
    res.env = std::move(env);
    return res;
}

template struct Params<float>;
template struct Params<double>;
template Params<float> init_params<float>(const ModelConfig&);
template Params<double> init_params<double>(const ModelConfig&);
template void forward_step<float>(const Params<float>&, const std::vector<int>&, int,
                                  LstmState<float>&, StepOutputs<float>&, StepCache<float>*);
template void forward_step<double>(const Params<double>&, const std::vector<int>&, int,
                                   LstmState<double>&, StepOutputs<double>&, StepCache<double>*);
template GroupStats<float> group_pass<float>(const Params<float>&, const Group&, Params<float>*);
template GroupStats<double> group_pass<double>(const Params<double>&, const Group&,
                                               Params<double>*);

}  // namespace npi
