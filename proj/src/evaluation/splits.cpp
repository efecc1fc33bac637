#include "dynnet/evaluation/splits.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "dynnet/core/error.hpp"

namespace dynnet::eval {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::single: return "single";
    case Scheme::mixed: return "mixed";
    case Scheme::loso: return "loso";
    case Scheme::lawhern: return "lawhern";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::single, Scheme::mixed, Scheme::loso, Scheme::lawhern}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + name + "' (expected single, mixed, loso or lawhern)");
}

namespace {

std::vector<std::size_t> select(const data::TrialSet& set, auto&& keep) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.n_trials(); ++i)
    if (keep(i)) out.push_back(i);
  return out;
}

void require_nonempty(const std::vector<std::size_t>& v, const std::string& what) {
  if (v.empty()) throw DataError(DataErrorCode::degenerate, what + " is empty");
}

}  // namespace

SplitPlan make_splits(Scheme scheme, const data::TrialSet& set, const SplitOptions& options) {
  const std::vector<int> subjects = data::subject_ids(set);
  if (subjects.empty()) throw DataError(DataErrorCode::degenerate, "no trials to split");
  SplitPlan plan;
  plan.scheme = scheme;
  const auto is_train = [&](std::size_t i) { return set.sessions[i] == data::Session::train; };
  const auto held_out_test = [&](int s) {
    return select(set, [&](std::size_t i) {
      return set.subjects[i] == s && (!options.test_session_only || !is_train(i));
    });
  };

  switch (scheme) {
    case Scheme::single:
      for (int s : subjects) {
        Fold f;
        f.test_subject = s;
        f.train = select(set, [&](std::size_t i) { return set.subjects[i] == s && is_train(i); });
        f.test = select(set, [&](std::size_t i) { return set.subjects[i] == s && !is_train(i); });
        require_nonempty(f.train, "train session of subject " + std::to_string(s));
        require_nonempty(f.test, "test session of subject " + std::to_string(s));
        plan.folds.push_back(std::move(f));
      }
      break;
    case Scheme::mixed: {
      const auto pooled = select(set, is_train);
      require_nonempty(pooled, "pooled train session");
      for (int s : subjects) {
        Fold f;
        f.test_subject = s;
        f.train = pooled;
        f.test = select(set, [&](std::size_t i) { return set.subjects[i] == s && !is_train(i); });
        require_nonempty(f.test, "test session of subject " + std::to_string(s));
        plan.folds.push_back(std::move(f));
      }
      break;
    }
    case Scheme::loso:
      if (subjects.size() < 2) {
        throw DataError(DataErrorCode::degenerate, "loso needs at least 2 subjects");
      }
      for (int s : subjects) {
        Fold f;
        f.test_subject = s;
        f.train = select(set, [&](std::size_t i) { return set.subjects[i] != s; });
        f.test = held_out_test(s);
        require_nonempty(f.test, "held-out trials of subject " + std::to_string(s));
        plan.folds.push_back(std::move(f));
      }
      break;
    case Scheme::lawhern: {
      const std::size_t nt = options.lawhern_train_subjects, nv = options.lawhern_validation_subjects;
      if (nt == 0 || nv == 0) throw ConfigError("lawhern needs train and validation subjects");
      if (subjects.size() < nt + nv + 1) {
        throw DataError(DataErrorCode::degenerate,
                        "lawhern split needs " + std::to_string(nt + nv + 1) + " subjects, have " +
                            std::to_string(subjects.size()));
      }
      std::mt19937_64 rng(options.seed);
      for (int s : subjects) {
        std::vector<int> others;
        for (int o : subjects)
          if (o != s) others.push_back(o);
        std::shuffle(others.begin(), others.end(), rng);
        const std::set<int> tr(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(nt));
        const std::set<int> va(others.begin() + static_cast<std::ptrdiff_t>(nt),
                               others.begin() + static_cast<std::ptrdiff_t>(nt + nv));
        Fold f;
        f.test_subject = s;
        f.train = select(set, [&](std::size_t i) { return tr.contains(set.subjects[i]); });
        f.validation = select(set, [&](std::size_t i) { return va.contains(set.subjects[i]); });
        f.test = held_out_test(s);
        require_nonempty(f.test, "held-out trials of subject " + std::to_string(s));
        plan.folds.push_back(std::move(f));
      }
      break;
    }
  }
  return plan;
}

std::vector<std::string> check_plan(const SplitPlan& plan, const data::TrialSet& set) {
  std::vector<std::string> problems;
  const auto subjects_of = [&](const std::vector<std::size_t>& idx) {
    std::set<int> s;
    for (std::size_t i : idx) s.insert(set.subjects.at(i));
    return s;
  };
  const auto overlap = [](const auto& a, const auto& b) {
    return std::any_of(a.begin(), a.end(), [&](const auto& x) { return b.contains(x); });
  };
  for (std::size_t k = 0; k < plan.folds.size(); ++k) {
    const Fold& f = plan.folds[k];
    const std::string tag = "fold " + std::to_string(k) + ": ";
    const std::set<std::size_t> test(f.test.begin(), f.test.end());
    if (overlap(f.train, test)) problems.push_back(tag + "train and test share trials");
    if (overlap(f.validation, test)) problems.push_back(tag + "validation and test share trials");
    if (plan.scheme == Scheme::loso || plan.scheme == Scheme::lawhern) {
      const auto tr = subjects_of(f.train), va = subjects_of(f.validation), te = subjects_of(f.test);
      if (overlap(tr, te)) problems.push_back(tag + "train and test share subjects");
      if (overlap(va, te)) problems.push_back(tag + "validation and test share subjects");
      if (overlap(tr, va)) problems.push_back(tag + "train and validation share subjects");
    }
  }
  return problems;
}

}  // namespace dynnet::eval
