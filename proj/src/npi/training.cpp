#include "npi/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

namespace npi {

std::string hyperparams_to_json(const Hyperparams& h) {
    nlohmann::json j;
    j["lr"] = h.lr;
    j["beta1"] = h.beta1;
    j["beta2"] = h.beta2;
    j["eps"] = h.eps;
    j["clip_norm"] = h.clip_norm;
    j["batch_groups"] = h.batch_groups;
    j["max_epochs"] = h.max_epochs;
    j["early_stop_epochs"] = h.early_stop_epochs;
    j["seed"] = h.seed;
    return j.dump(2);
}

Hyperparams hyperparams_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Hyperparams h;
    h.lr = j.value("lr", h.lr);
    h.beta1 = j.value("beta1", h.beta1);
    h.beta2 = j.value("beta2", h.beta2);
    h.eps = j.value("eps", h.eps);
    h.clip_norm = j.value("clip_norm", h.clip_norm);
    h.batch_groups = j.value("batch_groups", h.batch_groups);
    h.max_epochs = j.value("max_epochs", h.max_epochs);
    h.early_stop_epochs = j.value("early_stop_epochs", h.early_stop_epochs);
    h.seed = j.value("seed", h.seed);
    if (h.lr <= 0 || h.beta1 <= 0 || h.beta1 >= 1 || h.beta2 <= 0 || h.beta2 >= 1 ||
        h.eps <= 0 || h.batch_groups < 1 || h.max_epochs < 1) {
        throw std::runtime_error("invalid hyperparameters");
    }
    return h;
}

std::vector<Group> build_examples(const ModelConfig& cfg,
                                  const std::vector<FlatRecord>& records) {
    // group by (trace_id, call_id); records appear in depth-first order
    std::map<std::pair<int, int>, Group> groups;
    std::vector<std::pair<int, int>> order;
    for (const FlatRecord& r : records) {
        auto key = std::make_pair(r.trace_id, r.call_id);
        auto it = groups.find(key);
        if (it == groups.end()) {
            order.push_back(key);
            Group g;
            g.prog = r.call.prog;
            g.args = r.call.args;
            it = groups.emplace(key, std::move(g)).first;
        }
        if (r.step != static_cast<int>(it->second.steps.size())) {
            throw std::runtime_error("rejected trace: non-contiguous step indices");
        }
        GroupStep s;
        s.x_idx = encoder_indices(cfg, r.obs, r.call.args);
        s.ret = r.out.ret;
        s.out_prog = r.out.next.prog;
        s.out_args = r.out.next.args;
        it->second.steps.push_back(std::move(s));
    }
    std::vector<Group> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        Group& g = groups[key];
        for (size_t i = 0; i < g.steps.size(); ++i) {
            if (g.steps[i].ret != (i + 1 == g.steps.size())) {
                throw std::runtime_error("rejected trace: ret must mark exactly the last step");
            }
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<Group> build_examples(const ModelConfig& cfg,
                                  const std::vector<TrainingTrace>& traces) {
    std::vector<FlatRecord> records;
    for (size_t i = 0; i < traces.size(); ++i) {
        std::string why;
        if (!validate_trace(cfg.task, cfg.encoder, traces[i].trace, traces[i].problem, &why)) {
            throw std::runtime_error("rejected trace " + std::to_string(i) + ": " + why);
        }
        auto flat = flatten_trace(traces[i].trace, static_cast<int>(i));
        records.insert(records.end(), std::make_move_iterator(flat.begin()),
                       std::make_move_iterator(flat.end()));
    }
    return build_examples(cfg, records);
}

double global_grad_norm(const Params<float>& grads) {
    double sq = 0;
    grads.for_each([&](const char*, const Mat<float>& m) {
        sq += m.cast<double>().squaredNorm();
    });
    return std::sqrt(sq);
}

double clip_global_norm(Params<float>& grads, double max_norm) {
    double norm = global_grad_norm(grads);
    if (norm > max_norm && norm > 0) {
        float scale = static_cast<float>(max_norm / norm);
        grads.for_each([&](const char*, Mat<float>& m) { m *= scale; });
    }
    return norm;
}

AdamState AdamState::like(const Params<float>& params) {
    AdamState s;
    s.m.cfg = params.cfg;
    s.m.allocate();
    s.v.cfg = params.cfg;
    s.v.allocate();
    return s;
}

void adam_update(Params<float>& params, const Params<float>& grads, AdamState& state,
                 const Hyperparams& hyper) {
    state.t++;
    const double b1 = hyper.beta1, b2 = hyper.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    auto pm = params.tensors();
    auto gm = grads.tensors_const();
    auto mm = state.m.tensors();
    auto vm = state.v.tensors();
    for (size_t i = 0; i < pm.size(); ++i) {
        Mat<float>& p = *pm[i];
        const Mat<float>& g = *gm[i];
        Mat<float>& m = *mm[i];
        Mat<float>& v = *vm[i];
        m = static_cast<float>(b1) * m + static_cast<float>(1 - b1) * g;
        v = static_cast<float>(b2) * v.array().matrix() +
            static_cast<float>(1 - b2) * g.array().square().matrix();
        Mat<float> mhat = m / static_cast<float>(corr1);
        Mat<float> vhat = v / static_cast<float>(corr2);
        p.array() -= static_cast<float>(hyper.lr) * mhat.array() /
                     (vhat.array().sqrt() + static_cast<float>(hyper.eps));
    }
}

TrainResult train(Params<float>& params, const std::vector<Group>& groups,
                  const Hyperparams& hyper, const std::string& log_csv_path,
                  std::ostream* progress) {
    if (groups.empty()) throw std::runtime_error("empty training set");
    TrainResult res;
    std::ofstream log;
    if (!log_csv_path.empty()) {
        log.open(log_csv_path);
        if (!log) throw std::runtime_error("cannot open " + log_csv_path);
        log << "epoch,loss,step_accuracy,wallclock\n";
    }

    AdamState adam = AdamState::like(params);
    Params<float> grads;
    grads.cfg = params.cfg;
    grads.allocate();

    std::vector<int> order(groups.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    const auto t0 = std::chrono::steady_clock::now();
    int streak = 0;
    for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
        Rng rng(mix_seed(hyper.seed, static_cast<uint64_t>(epoch), 0x65706f6368ull));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
            std::swap(order[i], order[rng.uniform_int(0, i)]);
        }

        double loss_sum = 0;
        long steps = 0, correct = 0;
        int in_batch = 0;
        grads.set_zero();
        for (size_t oi = 0; oi < order.size(); ++oi) {
            const Group& g = groups[static_cast<size_t>(order[oi])];
            GroupStats<float> st = group_pass<float>(params, g, &grads);
            if (!std::isfinite(st.loss)) {
                if (log) log.flush();
                throw TrainDivergence("loss is not finite at epoch " + std::to_string(epoch));
            }
            loss_sum += static_cast<double>(st.loss) * st.steps;
            steps += st.steps;
            correct += st.correct;
            in_batch++;
            if (in_batch == hyper.batch_groups || oi + 1 == order.size()) {
                if (in_batch > 1) {
                    float inv = 1.0f / static_cast<float>(in_batch);
                    grads.for_each([&](const char*, Mat<float>& m) { m *= inv; });
                }
                clip_global_norm(grads, hyper.clip_norm);
                adam_update(params, grads, adam, hyper);
                grads.set_zero();
                in_batch = 0;
            }
        }
        if (!params.all_finite()) {
            if (log) log.flush();
            throw TrainDivergence("parameters diverged at epoch " + std::to_string(epoch));
        }

        EpochLog el;
        el.epoch = epoch;
        el.loss = loss_sum / static_cast<double>(steps);
        el.step_acc = static_cast<double>(correct) / static_cast<double>(steps);
        el.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(el);
        res.epochs = epoch + 1;
        if (log) {
            log << el.epoch << ',' << el.loss << ',' << el.step_acc << ',' << el.wall_s << '\n';
        }
        if (progress && (epoch % 10 == 0 || el.step_acc >= 1.0)) {
            *progress << "epoch " << epoch << " loss " << el.loss << " acc " << el.step_acc
                      << '\n';
        }

        streak = el.step_acc >= 1.0 ? streak + 1 : 0;
        if (streak >= hyper.early_stop_epochs) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && !res.log.empty()) {
        res.converged = res.log.back().step_acc >= 1.0;
    }
    return res;
}

std::pair<double, double> teacher_forced_eval(const Params<float>& params,
                                              const std::vector<Group>& groups) {
    double loss_sum = 0;
    long steps = 0, correct = 0;
    for (const Group& g : groups) {
        GroupStats<float> st = group_pass<float>(params, g, nullptr);
        loss_sum += static_cast<double>(st.loss) * st.steps;
        steps += st.steps;
        correct += st.correct;
    }
    if (steps == 0) return {0.0, 0.0};
    return {loss_sum / static_cast<double>(steps),
            static_cast<double>(correct) / static_cast<double>(steps)};
}

}  // namespace npi
