#pragma once

// Hyperparameter selection: k-fold cross-validation over a forest grid and
// seeded random search over an MLP space.

#include <string>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/models/forest.hpp"
#include "phmprep/models/metrics.hpp"
#include "phmprep/models/mlp.hpp"
#include "phmprep/prepare.hpp"

namespace phmprep {

/// Seeded k-fold partition of 0..n-1. Fold sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(Errc::InvalidArgument, "k must be >= 2");
  if (n < k) throw Error(Errc::TooFewRows, std::to_string(n) + " rows for " + std::to_string(k) + " folds");
  Rng rng(seed);
  const auto order = rng.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t i = f * n / k; i < (f + 1) * n / k; ++i) folds[f].push_back(order[i]);
  return folds;
}

struct CvResult {
  ForestParams best;
  std::vector<double> mean_accuracy;  // one per grid point, in grid order
};

/// Mean held-out accuracy per grid point; the first maximum wins.
inline CvResult cross_validate(const LabeledSet& train, const std::vector<ForestParams>& grid, std::size_t k,
                               std::uint64_t seed) {
  if (grid.empty()) throw Error(Errc::GridEmpty, "cross_validate");
  const auto folds = kfold_indices(train.size(), k, seed);
  CvResult result;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> fit_rows;
      for (std::size_t o = 0; o < k; ++o)
        if (o != f) fit_rows.insert(fit_rows.end(), folds[o].begin(), folds[o].end());
      std::sort(fit_rows.begin(), fit_rows.end());
      const LabeledSet fit = train.subset(fit_rows);
      const LabeledSet held = train.subset(folds[f]);
      const ForestModel model = train_forest(fit, grid[g]);
      sum += evaluate(predict(model, held.x), held.y).accuracy.value();
    }
    result.mean_accuracy.push_back(sum / static_cast<double>(k));
    if (result.mean_accuracy[g] > result.mean_accuracy[best]) best = g;
  }
  result.best = grid[best];
  return result;
}

/// Discrete search space; each draw picks every field uniformly.
struct MlpSearchSpace {
  std::vector<std::vector<std::size_t>> hidden_layer_sizes;
  std::vector<double> learning_rates;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::size_t> epochs;

  bool empty() const {
    return hidden_layer_sizes.empty() || learning_rates.empty() || batch_sizes.empty() || epochs.empty();
  }
};

struct SearchDraw {
  MlpParams params;
  double validation_accuracy = 0.0;
};

struct SearchResult {
  MlpParams best;
  std::vector<SearchDraw> draws;
};

inline std::vector<MlpParams> draw_mlp_params(const MlpSearchSpace& space, std::size_t n_draws, std::uint64_t seed,
                                              std::uint64_t model_seed) {
  if (space.empty()) throw Error(Errc::SpaceEmpty, "random_search");
  if (n_draws < 1) throw Error(Errc::InvalidArgument, "n_draws must be >= 1");
  Rng rng(seed);
  std::vector<MlpParams> out;
  for (std::size_t i = 0; i < n_draws; ++i) {
    MlpParams p;
    p.hidden_layer_sizes = space.hidden_layer_sizes[rng.index(space.hidden_layer_sizes.size())];
    p.learning_rate = space.learning_rates[rng.index(space.learning_rates.size())];
    p.batch_size = space.batch_sizes[rng.index(space.batch_sizes.size())];
    p.epochs = space.epochs[rng.index(space.epochs.size())];
    p.seed = model_seed;
    out.push_back(p);
  }
  return out;
}

/// Trains one MLP per draw and keeps the best validation accuracy (first on ties).
/// Draws that diverge score zero instead of aborting the search.
inline SearchResult random_search(const LabeledSet& train, const LabeledSet& validation, const MlpSearchSpace& space,
                                  std::size_t n_draws, std::uint64_t seed) {
  SearchResult result;
  const auto candidates = draw_mlp_params(space, n_draws, derive_seed(seed, "draws"), derive_seed(seed, "model"));
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double acc = 0.0;
    try {
      const MlpModel model = train_mlp(train, validation, candidates[i]);
      acc = evaluate(predict(model, validation.x), validation.y).accuracy.value();
    } catch (const Error& e) {
      if (e.code() != Errc::NonFiniteLoss) throw;
    }
    result.draws.push_back({candidates[i], acc});
    if (acc > result.draws[best].validation_accuracy) best = i;
  }
  result.best = result.draws[best].params;
  return result;
}

}  // namespace phmprep
