#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "npi/model.hpp"
#include "npi/oracle.hpp"
#include "npi/trace_io.hpp"

namespace npi {

struct Hyperparams {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;
    int batch_groups = 1;
    int max_epochs = 300;
    int early_stop_epochs = 10;  // consecutive epochs at 100% step accuracy
    uint64_t seed = 0;
};

std::string hyperparams_to_json(const Hyperparams& h);
Hyperparams hyperparams_from_json(const std::string& text);

struct TrainDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One example per call occurrence; the LSTM unrolls from zero state inside
// each group. Records must form well-structured calls (single trailing ret).
std::vector<Group> build_examples(const ModelConfig& cfg, const std::vector<FlatRecord>& records);
std::vector<Group> build_examples(const ModelConfig& cfg,
                                  const std::vector<TrainingTrace>& traces);

double global_grad_norm(const Params<float>& grads);
// scales grads in place when their global norm exceeds max_norm; returns the
// pre-clip norm
double clip_global_norm(Params<float>& grads, double max_norm);

struct AdamState {
    Params<float> m, v;
    long t = 0;

    static AdamState like(const Params<float>& params);
};

void adam_update(Params<float>& params, const Params<float>& grads, AdamState& state,
                 const Hyperparams& hyper);

struct EpochLog {
    int epoch = 0;
    double loss = 0;       // per-step average
    double step_acc = 0;   // teacher-forced, within-epoch
    double wall_s = 0;
};

struct TrainResult {
    bool converged = false;
    int epochs = 0;
    std::vector<EpochLog> log;
};

// Seeded-shuffle epoch loop with gradient clipping and Adam; optionally
// streams one CSV row per epoch (epoch,loss,step_accuracy,wallclock) and
// progress lines. Aborts with TrainDivergence on non-finite loss.
TrainResult train(Params<float>& params, const std::vector<Group>& groups,
                  const Hyperparams& hyper, const std::string& log_csv_path = "",
                  std::ostream* progress = nullptr);

// Clean pass at fixed parameters: (per-step mean loss, step accuracy).
std::pair<double, double> teacher_forced_eval(const Params<float>& params,
                                              const std::vector<Group>& groups);

}  // namespace npi
