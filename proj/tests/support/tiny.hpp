#pragma once

// A seconds-scale experiment: 4 synthetic 16x16 classes in 2 tasks, narrow
// backbones, one epoch.

#include "sfd/harness/config.hpp"

namespace sfd::check {

inline constexpr const char* kTinyConfig = R"({
  "dataset": {"kind": "synthetic", "resolution": 16, "synthetic": {"classes": 4, "per_class": 10, "size": 16}},
  "tasks": {"count": 2, "classes_per_task": 2},
  "methods": ["FT"],
  "seeds": [0],
  "training": {"epochs": 1, "batch_size": 8, "translator_epochs": 1, "eval_batch_size": 16},
  "pretraining": {"epochs": 0},
  "model": {"stage_channels": [4, 4, 8, 8], "embedding_dim": 8, "attention_reduction": 2,
            "cada": {"latent_dim": 4, "hidden_dim": 8}}
})";

inline harness::ExperimentConfig tiny_config() { return harness::parse_config(kTinyConfig); }

}  // namespace sfd::check
