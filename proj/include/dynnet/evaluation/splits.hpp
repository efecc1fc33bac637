#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynnet/dataio/trialset.hpp"

namespace dynnet::eval {

enum class Scheme { single, mixed, loso, lawhern };

std::string to_string(Scheme s);
/// Throws ConfigError on an unknown name.
Scheme parse_scheme(const std::string& name);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;  // empty when the scheme has none
  std::vector<std::size_t> test;
  int test_subject = 0;
};

struct SplitPlan {
  Scheme scheme = Scheme::single;
  std::vector<Fold> folds;
};

struct SplitOptions {
  // loso and lawhern: test on every trial of the held-out subject, or only
  // on its test-session trials.
  bool test_session_only = false;
  std::size_t lawhern_train_subjects = 5;
  std::size_t lawhern_validation_subjects = 3;
  std::uint64_t seed = 0;  // lawhern subject assignment
};

/// single: each subject's train session vs its test session.
/// mixed: every train-session trial vs each subject's test session.
/// loso: all other subjects vs the held-out subject.
/// lawhern: seeded 5 train / 3 validation subjects vs the held-out one.
/// Throws DataError when the set lacks the sessions or subjects needed.
SplitPlan make_splits(Scheme scheme, const data::TrialSet& set, const SplitOptions& options = {});

/// Violations of the disjointness rules (empty when the plan is sound).
std::vector<std::string> check_plan(const SplitPlan& plan, const data::TrialSet& set);

}  // namespace dynnet::eval
