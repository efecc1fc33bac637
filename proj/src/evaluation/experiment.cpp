#include "dynnet/evaluation/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "dynnet/builder/builder.hpp"
#include "dynnet/builder/weights.hpp"
#include "dynnet/core/error.hpp"
#include "dynnet/core/seed.hpp"
#include "dynnet/evaluation/stats.hpp"
#include "dynnet/signal/ema.hpp"
#include "dynnet/signal/resample.hpp"

namespace dynnet::eval {

data::TrialSet preprocess(const data::TrialSet& set, const Preprocess& p) {
  data::TrialSet out = p.window ? data::extract_window(set, p.window->first, p.window->second) : set;
  if (p.bandpass) {
    const auto f = signal::butter_bandpass(p.bandpass_order, p.bandpass->first, p.bandpass->second, out.fs);
    out.data = signal::filtfilt(f, out.data);
  }
  if (p.resample_hz && *p.resample_hz != out.fs) {
    out.data = signal::resample(out.data, out.fs, *p.resample_hz);
    out.fs = *p.resample_hz;
  }
  if (p.ema_decay) out.data = signal::ema_standardize(out.data, *p.ema_decay);
  return out;
}

nn::LabeledTensors<float> to_tensors(const data::TrialSet& set) {
  return {set.data.reshaped(nn::Shape{set.n_trials(), 1, set.n_channels(), set.n_samples()}),
          set.labels};
}

std::string method_name(const Method& m) {
  return std::holds_alternative<EegnetMethod>(m) ? "EEGNet" : "FBCSP";
}

namespace {

struct Group {
  const Fold* fold;               // representative (train/validation)
  std::vector<std::size_t> members;  // fold indices sharing it
};

std::vector<Group> group_folds(const SplitPlan& plan) {
  std::vector<Group> groups;
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const Fold& f = plan.folds[k];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.fold->train == f.train && g.fold->validation == f.validation;
    });
    if (it == groups.end()) {
      groups.push_back({&f, {k}});
    } else {
      it->members.push_back(k);
    }
  }
  return groups;
}

int class_count(const data::TrialSet& set) {
  int top = 0;
  for (int l : set.labels) top = std::max(top, l);
  return top + 1;
}

}  // namespace

ResultColumn run_experiment(const Method& method, const data::TrialSet& raw, const SplitPlan& plan,
                            const ExperimentOptions& options) {
  if (options.repetitions == 0) throw ConfigError("repetitions must be positive");
  if (plan.folds.empty()) throw ConfigError("split plan has no folds");
  const Preprocess& prep = std::visit([](const auto& m) -> const Preprocess& { return m.preprocess; }, method);
  const data::TrialSet set = preprocess(raw, prep);
  const int classes = class_count(set);

  if (const auto* e = std::get_if<EegnetMethod>(&method)) {
    if (e->spec.h != set.n_channels() || e->spec.w != set.n_samples()) {
      throw ConfigError("model expects " + std::to_string(e->spec.h) + "x" + std::to_string(e->spec.w) +
                        " inputs but preprocessed trials are " + std::to_string(set.n_channels()) + "x" +
                        std::to_string(set.n_samples()));
    }
    if (e->spec.neurons_list.empty() || e->spec.neurons_list.back() < static_cast<std::size_t>(classes)) {
      throw ConfigError("model output is narrower than the " + std::to_string(classes) + " classes in the data");
    }
  }

  ResultColumn column;
  column.name = method_name(method) + "-" + to_string(plan.scheme);
  for (const auto& f : plan.folds) column.subjects.push_back(f.test_subject);
  column.accuracy.assign(plan.folds.size(), std::vector<double>(options.repetitions, 0.0));

  const auto groups = group_folds(plan);
  std::vector<std::function<void()>> tasks;
  std::mutex log_mutex;
  const auto report = [&](std::size_t k, std::size_t rep, double acc) {
    if (!options.log) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s fold %zu (subject %d) rep %zu: %.2f%%", column.name.c_str(), k,
                  plan.folds[k].test_subject, rep, acc);
    std::lock_guard lock(log_mutex);
    options.log(buf);
  };
  const auto keep = [&](std::size_t k, std::size_t rep, const char* ext, auto&& bytes) {
    if (!options.save_model) return;
    const std::string blob = bytes();
    std::lock_guard lock(log_mutex);
    options.save_model(k, rep, ext, blob);
  };

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    if (const auto* e = std::get_if<EegnetMethod>(&method)) {
      for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        tasks.push_back([&, e, rep] {
          const std::uint64_t seed = derive_seed(options.seed, group.members.front(), rep);
          auto model = builder::build_model<float>(e->spec, seed).model;
          nn::TrainConfig cfg = e->train;
          cfg.seed = seed;
          const auto train = to_tensors(data::subset(set, group.fold->train));
          std::optional<nn::LabeledTensors<float>> val;
          if (!group.fold->validation.empty()) val = to_tensors(data::subset(set, group.fold->validation));
          nn::train(model, train, cfg, val ? &*val : nullptr);
          keep(group.members.front(), rep, "dnnw",
               [&] { return builder::serialize_weights(e->spec, model); });
          for (std::size_t k : group.members) {
            const auto test = to_tensors(data::subset(set, plan.folds[k].test));
            const auto pred = nn::predict(model, test.inputs);
            column.accuracy[k][rep] = accuracy(pred.labels, test.labels);
            report(k, rep, column.accuracy[k][rep]);
          }
        });
      }
    } else {
      const auto& f = std::get<FbcspMethod>(method);
      // FBCSP has no randomness: one fit serves every repetition.
      tasks.push_back([&, g] {
        const auto model = fbcsp::ovr_fit(data::subset(set, groups[g].fold->train), f.config, classes);
        keep(groups[g].members.front(), 0, "fbcs", [&] { return fbcsp::serialize(model); });
        for (std::size_t k : groups[g].members) {
          const auto test = data::subset(set, plan.folds[k].test);
          const double acc = accuracy(fbcsp::ovr_predict(model, test), test.labels);
          for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
            column.accuracy[k][rep] = acc;
            report(k, rep, acc);
          }
        }
      });
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t i; !failed && (i = next++) < tasks.size();) {
      try {
        tasks[i]();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return column;
}

}  // namespace dynnet::eval
