#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "npi/rng.hpp"
#include "npi/trace.hpp"

namespace npi {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

struct ModelConfig {
    Task task = Task::Addition;
    Encoder encoder = Encoder::Values;
    int s_dim = 128;    // encoder output width
    int emb_dim = 32;   // program embedding
    int key_dim = 16;   // program key
    int hidden = 256;   // per LSTM layer
    uint64_t seed = 0;

    int obs_width() const;
    int arg_vocab() const;
    int programs() const;
    int input_width() const { return obs_width() + kArgSlots * arg_vocab(); }

    static ModelConfig for_task(Task task, Encoder enc, uint64_t seed);
};

// All learnable tensors. Vectors are stored as n x 1 matrices so optimizer,
// clipping, checkpointing and finite-difference checks can walk one uniform
// list of named blocks.
template <class S>
struct Params {
    ModelConfig cfg;
    Mat<S> enc_W, enc_b;
    Mat<S> emb;   // programs x emb_dim
    Mat<S> key;   // programs x key_dim
    Mat<S> l1_W, l1_b;  // 4H x (s+emb+H), 4H x 1
    Mat<S> l2_W, l2_b;  // 4H x (H+H),     4H x 1
    Mat<S> end_W, end_b;
    Mat<S> dec_W, dec_b;
    std::array<Mat<S>, 3> arg_W, arg_b;

    template <class F>
    void for_each(F&& f) {
        f("enc_W", enc_W); f("enc_b", enc_b);
        f("prog_emb", emb); f("prog_key", key);
        f("lstm1_W", l1_W); f("lstm1_b", l1_b);
        f("lstm2_W", l2_W); f("lstm2_b", l2_b);
        f("end_W", end_W); f("end_b", end_b);
        f("dec_W", dec_W); f("dec_b", dec_b);
        f("arg0_W", arg_W[0]); f("arg0_b", arg_b[0]);
        f("arg1_W", arg_W[1]); f("arg1_b", arg_b[1]);
        f("arg2_W", arg_W[2]); f("arg2_b", arg_b[2]);
    }
    template <class F>
    void for_each(F&& f) const {
        const_cast<Params*>(this)->for_each(
            [&](const char* n, Mat<S>& m) { f(n, const_cast<const Mat<S>&>(m)); });
    }

    void allocate();  // shapes from cfg, all zero
    void set_zero();
    bool all_finite() const;

    template <class S2>
    Params<S2> cast() const {
        Params<S2> out;
        out.cfg = cfg;
        out.allocate();
        auto src = tensors_const();
        auto dst = out.tensors();
        for (size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<S2>();
        return out;
    }

    std::vector<Mat<S>*> tensors();
    std::vector<const Mat<S>*> tensors_const() const;
};

// seeded init: uniform in [-0.08, 0.08], forget-gate biases +1
template <class S>
Params<S> init_params(const ModelConfig& cfg);

template <class S>
struct LstmState {
    Vec<S> h1, c1, h2, c2;
    void zero(int hidden) {
        h1 = Vec<S>::Zero(hidden);
        c1 = Vec<S>::Zero(hidden);
        h2 = Vec<S>::Zero(hidden);
        c2 = Vec<S>::Zero(hidden);
    }
    bool operator==(const LstmState& o) const {
        return h1 == o.h1 && c1 == o.c1 && h2 == o.h2 && c2 == o.c2;
    }
};

template <class S>
struct StepOutputs {
    S r = 0;
    Vec<S> prog_logits;
    std::array<Vec<S>, 3> arg_logits;
};

// active one-hot positions of the encoder input [obs slots | arg slots]
std::vector<int> encoder_indices(const ModelConfig& cfg, const Observation& obs,
                                 const std::array<int, kArgSlots>& args);

template <class S>
struct StepCache {
    std::vector<int> x_idx;
    int prog = 0;
    Vec<S> h1_prev, c1_prev, h2_prev, c2_prev;
    Vec<S> s_pre, s;
    Vec<S> u1;  // [s; emb]
    Vec<S> i1, f1, g1, o1, c1, tc1, h1;
    Vec<S> i2, f2, g2, o2, c2, tc2, h2;
    S r_pre = 0, r = 0;
    Vec<S> q;
    Vec<S> prog_logits;
    std::array<Vec<S>, 3> arg_logits;
};

// One controller step: encoder, two LSTM layers, all decoder heads.
// Advances state in place; fills cache when given one.
template <class S>
void forward_step(const Params<S>& P, const std::vector<int>& x_idx, int prog,
                  LstmState<S>& state, StepOutputs<S>& out, StepCache<S>* cache);

template <class S>
void forward_step(const Params<S>& P, const std::vector<int>& x_idx, int prog,
                  LstmState<S>& state, StepOutputs<S>& out) {
    forward_step(P, x_idx, prog, state, out, static_cast<StepCache<S>*>(nullptr));
}

int decode_argmax(const float* data, int n);
template <class S>
int decode_argmax_vec(const Vec<S>& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

// ------------------------------------------------------------- training math

struct GroupStep {
    std::vector<int> x_idx;
    bool ret = false;
    int out_prog = 0;
    std::array<int, kArgSlots> out_args{0, 0, 0};
};

// One call occurrence: the LSTM unrolls from zero state over its steps.
struct Group {
    int prog = 0;
    std::array<int, kArgSlots> args{0, 0, 0};
    std::vector<GroupStep> steps;
};

template <class S>
struct GroupStats {
    S loss = 0;        // per-step average over the group
    int steps = 0;
    int correct = 0;   // steps with every head argmax-correct
};

// Forward (and backward when grads != nullptr) through one call group.
// Gradients accumulate into *grads scaled by 1/steps, matching the loss.
template <class S>
GroupStats<S> group_pass(const Params<S>& P, const Group& g, Params<S>* grads);

// ---------------------------------------------------------------- inference

struct InferenceLimits {
    double alpha = 0.5;
    int max_steps_per_call = 64;
    int max_depth = 256;
    long max_total_steps = 200000;
    bool tail_collapse = true;

    static InferenceLimits for_size(int problem_size);
};

enum class RunStatus { Ok, StepBudget, CallStepBudget, DepthBudget, InvalidAction };
const char* run_status_name(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::Ok;
    TaskEnv env;
    std::unique_ptr<TraceNode> trace;
    long total_steps = 0;
    int peak_depth = 0;
};

// Neural programming inference: fresh zeroed controller state per call,
// argmax decoding, the terminating step's action still executes. When
// teacher is given, decoded outputs are replaced by the teacher trace's
// outputs step for step (the model still runs underneath).
RunResult run_inference(const Params<float>& P, TaskEnv env, ProgramCall call,
                        const InferenceLimits& limits, const TraceNode* teacher = nullptr);

}  // namespace npi
