#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wic/corpus/records.hpp"
#include "wic/provider/toy_mlm.hpp"
#include "wic/trainer/optim.hpp"

namespace wic::selftest {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Synthetic corpus for the training checks: `n` monolingual triples over a
// small invented vocabulary, plus a toy MLM whose vocabulary covers them.
struct SyntheticSetup {
  std::vector<corpus::TrainingTriple> triples;
  provider::ToyMLMConfig mlm;
};
SyntheticSetup synthetic_setup(std::size_t n, std::uint64_t seed);

// Replaces every negative sentence with random words (same length and target).
std::vector<corpus::TrainingTriple> scramble_negatives(std::vector<corpus::TrainingTriple> triples,
                                                       std::uint64_t seed);

// Settings of the short overfitting run used by criteria 3 and 4.
trainer::TrainConfig smoke_train_config(bool use_negatives);

CriterionResult gradient_fidelity();      // 1
CriterionResult loss_formulas();          // 2
CriterionResult frozen_model();           // 3
CriterionResult overfit_smoke();          // 4
CriterionResult alignment_oracle();       // 5
CriterionResult filtering_oracle();       // 6
CriterionResult metric_oracles();         // 7
CriterionResult layer_policy();           // 8
CriterionResult format_roundtrips();      // 10

// Criterion 9 needs the full pipeline; the caller supplies a runner that
// executes it into a directory and returns false on failure.
using PipelineRunner = std::function<bool(const std::string& out_dir, std::string& error)>;
CriterionResult pipeline_determinism(const PipelineRunner& run, const std::string& scratch_dir);

// Runs build-corpus, train, evaluate and analyze as separate processes of
// `binary`, from inside `fixture_dir` with its config file. Stderr of each
// run goes to <out_dir>.log, next to (not inside) the compared outputs.
PipelineRunner cli_pipeline(std::string binary, std::string fixture_dir, std::string config_file);

// Criteria 1–8 and 10, in order.
std::vector<CriterionResult> run_core();

std::string format_line(const CriterionResult& r);

}  // namespace wic::selftest
