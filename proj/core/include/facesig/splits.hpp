#ifndef FACESIG_SPLITS_HPP
#define FACESIG_SPLITS_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace facesig {

/// Deterministic child-seed derivation (splitmix64 step).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Stratified k-fold assignment: returns fold id per sample. Each
/// class's samples are shuffled and dealt round-robin, so every fold
/// keeps >= 1 sample per class whenever a class has >= k samples.
/// Throws UnstratifiableFold when a class has fewer samples than folds
/// would leave stratifiable (< 2 per class overall).
std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, std::mt19937_64& rng);

/// Stratified train/test split preserving per-class proportions within
/// rounding. Returns (train_indices, test_indices).
std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                               double test_fraction,
                                                               std::mt19937_64& rng);

} // namespace facesig

#endif
