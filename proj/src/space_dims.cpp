#include "mvkl/types.hpp"

#include <algorithm>

namespace mvkl {

SpaceDims::SpaceDims(std::vector<int> d) : SpaceDims(d, d) {}

SpaceDims::SpaceDims(std::vector<int> d, std::vector<int> e) : d_(std::move(d)), e_(std::move(e))
{
    if (d_.size() != e_.size()) {
        throw ValidationError("SpaceDims: " + std::to_string(d_.size()) + " hypothesis dims but " +
                              std::to_string(e_.size()) + " label dims");
    }
    offsets_.reserve(d_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < d_.size(); ++i) {
        if (d_[i] <= 0 || e_[i] <= 0) {
            throw ValidationError("SpaceDims: dimensions of point " + std::to_string(i) +
                                  " must be positive");
        }
        offsets_.push_back(offsets_.back() + d_[i]);
    }
}

bool SpaceDims::homogeneous() const
{
    return std::adjacent_find(d_.begin(), d_.end(), std::not_equal_to<>()) == d_.end();
}

}  // namespace mvkl
