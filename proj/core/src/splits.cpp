#include "facesig/splits.hpp"
#include "facesig/errors.hpp"

#include <algorithm>
#include <map>

namespace facesig {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<int> stratified_kfold(const std::vector<int>& labels, int k, std::mt19937_64& rng) {
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    if (by_class.size() < 2) throw UnstratifiableFold("fewer than two classes");
    for (const auto& [cls, idx] : by_class)
        if (static_cast<int>(idx.size()) < 2)
            throw UnstratifiableFold("class " + std::to_string(cls) + " has < 2 samples");
    std::vector<int> fold(labels.size(), 0);
    int offset = 0;
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (size_t i = 0; i < idx.size(); ++i)
            fold[idx[i]] = static_cast<int>((i + offset) % k);
        offset += static_cast<int>(idx.size());
    }
    return fold;
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                               double test_fraction,
                                                               std::mt19937_64& rng) {
    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    std::vector<int> train, test;
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 2)
            throw TooFewSamples("class " + std::to_string(cls) + " has < 2 samples");
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_test = static_cast<size_t>(std::lround(test_fraction * idx.size()));
        n_test = std::clamp<size_t>(n_test, 1, idx.size() - 1);
        test.insert(test.end(), idx.begin(), idx.begin() + n_test);
        train.insert(train.end(), idx.begin() + n_test, idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

} // namespace facesig
